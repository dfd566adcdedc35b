import os
from configparser import ConfigParser

config = ConfigParser()

###CHANGE NAME TO GET NEW FILE###
config_path = os.path.join(os.path.dirname(__file__), 'nnlab_config.ini')
config.add_section('arithmetic')
config.set('arithmetic', 'mode', 'exact')
config.set('arithmetic', 'exact_cap', '5000')
config.set('arithmetic', 'float_slack', '1e-9')
config.add_section('synthesis')
config.set('synthesis', 'tower_bit_cap', str(2 ** 24))
config.set('synthesis', 'stage_window', '0')
config.set('synthesis', 'max_length', '100000')
config.add_section('expansion')
config.set('expansion', 'precision_bits', '128')
config.set('expansion', 'precision_retries', '12')
config.set('expansion', 'orbit_limit', '100000')
config.add_section('reports')
config.set('reports', 'checkpoint_ratio', '1.25')
config.set('reports', 'shortfall_tolerance', '0.02')
config.set('reports', 'tail_fraction', '0.25')
config.set('reports', 'history', '0')
config.set('reports', 'seed', '0')
config.add_section('logging')
config.set('logging', 'level', 'WARNING')


if __name__ == '__main__':
    with open(config_path, 'w') as f:
        config.write(f)
