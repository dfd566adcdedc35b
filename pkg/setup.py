from setuptools import setup

with open("README.md", "r") as fh:
    long_description = fh.read()

setup(name='nnlab',
      version='0.1',
      description='exact construction and verification of non-normal digit expansions',
      long_description=long_description,
      long_description_content_type="text/markdown",
      license='MIT',
      packages=['nnlab'],
      package_data={'nnlab': ['nnlab_config.ini']},
      install_requires=[
            'numpy',
            'mpmath',
            'networkx',
      ],
      extras_require={
            'tests': ['pytest'],
      },
      entry_points={
            'console_scripts': ['nnlab = nnlab.cli:main'],
      },
      zip_safe=False)
