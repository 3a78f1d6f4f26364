"""
Orchestrator package for asyndgan-desk
Experiment configuration, node and generator workers, and the round loop
"""

from src.orchestrator.config import (
    DiscriminatorConfig, EvaluationConfig, ExperimentConfig, GeneratorConfig, NodeSpec, Participant,
    ProtocolConfig, Setting, Task, TheoryConfig, build_experiment_config, list_bundled_experiments,
    load_experiment_config, validate,
)
from src.orchestrator.generator_worker import GeneratorRound, GeneratorWorker
from src.orchestrator.node import LocalDataset, NodeWorker, SeedStream, build_datasets
from src.orchestrator.trainer import (
    AsynDGANTrainer, MetricsReport, RoundRecord, complete_modality, run_training,
)

__all__ = [
    'DiscriminatorConfig', 'EvaluationConfig', 'ExperimentConfig', 'GeneratorConfig', 'NodeSpec',
    'Participant', 'ProtocolConfig', 'Setting', 'Task', 'TheoryConfig', 'build_experiment_config',
    'list_bundled_experiments', 'load_experiment_config', 'validate',
    'GeneratorRound', 'GeneratorWorker',
    'LocalDataset', 'NodeWorker', 'SeedStream', 'build_datasets',
    'AsynDGANTrainer', 'MetricsReport', 'RoundRecord', 'complete_modality', 'run_training',
]
