"""
Default experiment settings for asyndgan-desk
"""

import os

from dotenv import load_dotenv

load_dotenv()

EXPERIMENT_DEFAULTS = {
    'name': 'toy_asyndgan',
    'setting': 'asyndgan',         # syn_all | asyndgan | syn_subset | syn_plus_real
    'task': 'mixture',             # mixture | multimodal
    'subset': 1,                   # 1-based node for syn_subset / syn_plus_real

    # Training schedule
    'rounds': int(os.getenv('ASYNDGAN_ROUNDS', 5000)),   # total generator iterations T
    'disc_steps': 1,               # discriminator iterations k per round
    'batch_size': 10,              # m
    'seed': int(os.getenv('ASYNDGAN_SEED', 0)),
    'log_interval': 250,

    # Data shape
    'condition_dim': 2,
    'sample_dim': 2,
    'modality_count': 1,
    'condition_variance': 0.5,     # x ~ N(0, 0.5 I) for the mixture task

    # Fixed input/output scaling inside the networks
    'sample_scale': 10.0,
    'condition_scale': 1.0,
}

# One entry per data node; priors default to |S_j| / sum |S|
NODE_DEFAULTS = [
    {'name': 'node-1', 'center': [10.0, 10.0], 'variance': [0.5, 0.5], 'size': 1000, 'modalities': [1]},
    {'name': 'node-2', 'center': [10.0, -10.0], 'variance': [0.5, 0.5], 'size': 1000, 'modalities': [1]},
    {'name': 'node-3', 'center': [-10.0, 10.0], 'variance': [0.5, 0.5], 'size': 1000, 'modalities': [1]},
    {'name': 'node-4', 'center': [-10.0, -10.0], 'variance': [0.5, 0.5], 'size': 1000, 'modalities': [1]},
]

LOSS_DEFAULTS = {
    'l1_weight': 10.0,
    'perceptual_weight': 0.0,      # no pretrained feature network at toy scale
    'adversarial': 'minimax',      # minimax | non_saturating
}

OPTIMIZER_DEFAULTS = {
    'learning_rate': 1e-4,
    'beta1': 0.5,
    'beta2': 0.999,
    'eps': 1e-8,
}

GENERATOR_DEFAULTS = {
    'hidden': [64, 64],
    'activation': 'tanh',
    'dropout': 0.5,                # the generator's only noise source
}

DISCRIMINATOR_DEFAULTS = {
    'hidden': [64, 64],
    'leaky_slope': 0.2,
}

MULTIMODAL_DEFAULTS = {
    'label_resolution': 0.25,      # grid step of the coarse label the generator is conditioned on
    'transforms': [
        {'matrix': [[1.0, 0.0], [0.0, 1.0]], 'offset': [0.0, 0.0]},
        {'matrix': [[2.0, 0.0], [0.0, 2.0]], 'offset': [1.0, 1.0]},
        {'matrix': [[0.7071067811865476, -0.7071067811865476],
                    [0.7071067811865476, 0.7071067811865476]], 'offset': [0.0, 0.0]},
    ],
}

PROTOCOL_DEFAULTS = {
    'transport': os.getenv('ASYNDGAN_TRANSPORT', 'inproc'),       # inproc | tcp
    'recv_timeout': float(os.getenv('ASYNDGAN_RECV_TIMEOUT', 30.0)),
    'baseline_parameters': 42_500_000,
}

EVALUATION_DEFAULTS = {
    'eval_samples': 4000,
    'coverage_radius': 3.0,
    'scatter_points': 500,
}

THEORY_DEFAULTS = {
    'enabled': False,
    'trials': 50,
    'perturbations': 1000,
}

# Section name -> defaults, in document order
DEFAULT_SECTIONS = {
    'experiment': EXPERIMENT_DEFAULTS,
    'loss': LOSS_DEFAULTS,
    'optimizer': OPTIMIZER_DEFAULTS,
    'generator': GENERATOR_DEFAULTS,
    'discriminator': DISCRIMINATOR_DEFAULTS,
    'multimodal': MULTIMODAL_DEFAULTS,
    'protocol': PROTOCOL_DEFAULTS,
    'evaluation': EVALUATION_DEFAULTS,
    'theory': THEORY_DEFAULTS,
}

EXPERIMENTS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'experiments')
DEFAULT_EXPERIMENT = 'toy_asyndgan'
