"""
Experiment configuration
TOML experiment files merged over the defaults in config.settings, validated in one pass
"""

import copy
import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from config.settings import DEFAULT_EXPERIMENT, DEFAULT_SECTIONS, EXPERIMENTS_DIR, NODE_DEFAULTS
from src.autodiff import Activation, AdamConfig
from src.exceptions import ConfigError
from src.gan import AdversarialForm, LossConfig
from src.toytask import GaussianSubset, MultimodalSpec
from src.utils.helpers import config_hash

logger = logging.getLogger(__name__)

PRIOR_TOLERANCE = 1e-12
TRANSPORT_KINDS = ("inproc", "tcp")


class Setting(Enum):
    SYN_ALL = "syn_all"              # one conventional GAN on the pooled data
    ASYNDGAN = "asyndgan"            # central generator, one discriminator set per node
    SYN_SUBSET = "syn_subset"        # one conventional GAN on a single node's data
    SYN_PLUS_REAL = "syn_plus_real"  # asyndgan, evaluated as synthetic plus one node's real data


class Task(Enum):
    MIXTURE = "mixture"          # x ~ N(0, s I) independent of y
    MULTIMODAL = "multimodal"    # x = base point, y = affine channels of it


@dataclass(frozen=True)
class NodeSpec:
    name: str
    center: Tuple[float, float]
    variance: Tuple[float, float]
    size: int
    modalities: Tuple[int, ...] = (1,)

    @property
    def subset(self) -> GaussianSubset:
        return GaussianSubset(center=self.center, covariance=self.variance, count=self.size)


@dataclass(frozen=True)
class Participant:
    """A training-time data holder: one node, or the pooled union for syn_all"""
    name: str
    sources: Tuple[NodeSpec, ...]
    modalities: Tuple[int, ...]

    @property
    def size(self) -> int:
        return sum(s.size for s in self.sources)


@dataclass(frozen=True)
class GeneratorConfig:
    hidden: Tuple[int, ...] = (64, 64)
    activation: Activation = Activation.TANH
    dropout: float = 0.5


@dataclass(frozen=True)
class DiscriminatorConfig:
    hidden: Tuple[int, ...] = (64, 64)
    leaky_slope: float = 0.2


@dataclass(frozen=True)
class ProtocolConfig:
    transport: str = "inproc"
    recv_timeout: float = 30.0
    baseline_parameters: int = 42_500_000


@dataclass(frozen=True)
class EvaluationConfig:
    eval_samples: int = 4000
    coverage_radius: float = 3.0
    scatter_points: int = 500


@dataclass(frozen=True)
class TheoryConfig:
    enabled: bool = False
    trials: int = 50
    perturbations: int = 1000


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    setting: Setting
    task: Task
    nodes: Tuple[NodeSpec, ...]
    subset: int = 1
    priors: Optional[Tuple[float, ...]] = None
    rounds: int = 5000
    disc_steps: int = 1
    batch_size: int = 10
    seed: int = 0
    log_interval: int = 250
    condition_dim: int = 2
    sample_dim: int = 2
    modality_count: int = 1
    condition_variance: float = 0.5
    sample_scale: float = 10.0
    condition_scale: float = 1.0
    label_resolution: float = 0.25
    loss: LossConfig = field(default_factory=LossConfig)
    optimizer: AdamConfig = field(default_factory=AdamConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    discriminator: DiscriminatorConfig = field(default_factory=DiscriminatorConfig)
    multimodal: Optional[MultimodalSpec] = None
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    theory: TheoryConfig = field(default_factory=TheoryConfig)
    source: Optional[str] = field(default=None, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def participants(self) -> Tuple[Participant, ...]:
        """Who trains a discriminator set under this setting"""
        if self.setting is Setting.SYN_ALL:
            union = tuple(sorted({k for n in self.nodes for k in n.modalities}))
            return (Participant("pooled", self.nodes, union),)
        if self.setting is Setting.SYN_SUBSET:
            node = self.nodes[self.subset - 1]
            return (Participant(node.name, (node,), node.modalities),)
        return tuple(Participant(n.name, (n,), n.modalities) for n in self.nodes)

    def resolved_priors(self) -> Tuple[float, ...]:
        """Explicit priors when given (asyndgan settings only), else |S_j| / sum |S|"""
        participants = self.participants()
        if self.priors is not None and len(participants) == self.n_nodes:
            return tuple(float(p) for p in self.priors)
        sizes = np.array([p.size for p in participants], dtype=np.float64)
        return tuple(float(s) for s in sizes / sizes.sum())

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return build_experiment_config(_set_dotted(self.to_document(), {
            (k if "." in k else f"experiment.{k}"): v for k, v in changes.items()
        }), source=self.source)

    def to_document(self) -> Dict[str, Any]:
        """The fully resolved config in TOML-document shape"""
        experiment = {
            'name': self.name, 'setting': self.setting.value, 'task': self.task.value,
            'subset': self.subset, 'rounds': self.rounds, 'disc_steps': self.disc_steps,
            'batch_size': self.batch_size, 'seed': self.seed, 'log_interval': self.log_interval,
            'condition_dim': self.condition_dim, 'sample_dim': self.sample_dim,
            'modality_count': self.modality_count, 'condition_variance': self.condition_variance,
            'sample_scale': self.sample_scale, 'condition_scale': self.condition_scale,
        }
        if self.priors is not None:
            experiment['priors'] = list(self.priors)
        multimodal = {} if self.multimodal is None else {'transforms': [
            {'matrix': [list(r) for r in t.matrix], 'offset': list(t.offset)} for t in self.multimodal.transforms
        ], 'label_resolution': self.label_resolution}
        return {
            'experiment': experiment,
            'nodes': [{'name': n.name, 'center': list(n.center), 'variance': list(n.variance),
                       'size': n.size, 'modalities': list(n.modalities)} for n in self.nodes],
            'loss': {'l1_weight': self.loss.l1_weight, 'perceptual_weight': self.loss.perceptual_weight,
                     'adversarial': self.loss.adversarial.value},
            'optimizer': asdict(self.optimizer),
            'generator': {'hidden': list(self.generator.hidden), 'activation': self.generator.activation.value,
                          'dropout': self.generator.dropout},
            'discriminator': {'hidden': list(self.discriminator.hidden),
                              'leaky_slope': self.discriminator.leaky_slope},
            'multimodal': multimodal,
            'protocol': asdict(self.protocol),
            'evaluation': asdict(self.evaluation),
            'theory': asdict(self.theory),
        }

    def resolved(self) -> Dict[str, Any]:
        doc = self.to_document()
        doc['resolved_priors'] = list(self.resolved_priors())
        return doc

    @property
    def hash(self) -> str:
        return config_hash(self.to_document())


# -- loading ------------------------------------------------------------------

def _deep_merge(base: Dict[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    out = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _set_dotted(doc: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Apply {"section.key": value} overrides; a bare key targets [experiment]"""
    doc = copy.deepcopy(doc)
    for dotted, value in overrides.items():
        if value is None:
            continue
        section, _, key = dotted.rpartition(".")
        doc.setdefault(section or "experiment", {})[key] = value
    return doc


def default_document() -> Dict[str, Any]:
    doc = {name: copy.deepcopy(values) for name, values in DEFAULT_SECTIONS.items()}
    doc['nodes'] = copy.deepcopy(NODE_DEFAULTS)
    return doc


def resolve_experiment_path(path: Union[str, Path, None]) -> Optional[Path]:
    """A file path, or the name of a bundled experiment under config/experiments"""
    if path is None:
        path = DEFAULT_EXPERIMENT
    candidate = Path(path)
    if candidate.is_file():
        return candidate
    bundled = Path(EXPERIMENTS_DIR) / f"{Path(path).stem}.toml"
    if bundled.is_file():
        return bundled
    raise ConfigError([f"config: no experiment file at {path!s} and no bundled experiment of that name"])


def load_experiment_config(path: Union[str, Path, None] = None,
                           overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """
    Load a TOML experiment, merge it over the defaults and validate.

    Args:
        path: TOML file or bundled experiment name; None loads the default experiment
        overrides: {"section.key": value} applied last (bare keys go to [experiment])

    Raises:
        ConfigError: every problem found, one diagnostic per field
    """
    resolved_path = resolve_experiment_path(path)
    try:
        with open(resolved_path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError([f"config: {resolved_path} is not valid TOML ({e})"]) from e

    doc = _deep_merge(default_document(), {k: v for k, v in data.items() if k != 'nodes'})
    if 'nodes' in data:
        doc['nodes'] = data['nodes']
    doc = _set_dotted(doc, overrides or {})
    config = build_experiment_config(doc, source=str(resolved_path))
    logger.info(f"Loaded experiment '{config.name}' ({config.setting.value}, {config.n_nodes} nodes) "
                f"from {resolved_path}")
    return config


def build_experiment_config(doc: Mapping[str, Any], source: Optional[str] = None) -> ExperimentConfig:
    """Build and validate from a document shaped like the TOML files (missing sections use defaults)"""
    full = _deep_merge(default_document(), {k: v for k, v in doc.items() if k != 'nodes'})
    if 'nodes' in doc:
        full['nodes'] = doc['nodes']
    problems: List[str] = []

    def enum_field(enum_cls, section: str, key: str):
        raw = full[section].get(key)
        try:
            return enum_cls(raw)
        except ValueError:
            allowed = ", ".join(e.value for e in enum_cls)
            problems.append(f"{section}.{key}: {raw!r} is not one of {allowed}")
            return None

    def number(section: str, key: str, kind=float):
        raw = full[section].get(key)
        try:
            if isinstance(raw, bool):
                raise TypeError
            value = kind(raw)
            if kind is int and value != raw:
                raise TypeError
            return value
        except (TypeError, ValueError):
            problems.append(f"{section}.{key}: expected {kind.__name__}, got {raw!r}")
            return kind(0)

    exp = full['experiment']
    setting = enum_field(Setting, 'experiment', 'setting')
    task = enum_field(Task, 'experiment', 'task')
    adversarial = enum_field(AdversarialForm, 'loss', 'adversarial')
    activation = enum_field(Activation, 'generator', 'activation')

    nodes: List[NodeSpec] = []
    for i, raw in enumerate(full.get('nodes') or []):
        where = f"nodes[{i}]"
        try:
            node = NodeSpec(
                name=str(raw.get('name', f"node-{i + 1}")),
                center=tuple(float(v) for v in raw['center']),
                variance=tuple(float(v) for v in raw.get('variance', (0.5, 0.5))),
                size=int(raw.get('size', 1000)),
                modalities=tuple(int(k) for k in raw.get('modalities', (1,))),
            )
        except (KeyError, TypeError, ValueError) as e:
            problems.append(f"{where}: malformed node entry ({e})")
            continue
        try:
            node.subset
        except ConfigError as e:
            problems.extend(f"{where}.{d.split('.', 1)[-1]}" for d in e.diagnostics)
        if node.size <= 0:
            problems.append(f"{where}.size: must be > 0 (got {node.size})")
        nodes.append(node)

    loss = None
    try:
        loss = LossConfig(
            l1_weight=number('loss', 'l1_weight'),
            perceptual_weight=number('loss', 'perceptual_weight'),
            adversarial=adversarial or AdversarialForm.MINIMAX,
        )
    except ConfigError as e:
        problems.extend(e.diagnostics)

    multimodal = None
    transforms = full['multimodal'].get('transforms') or []
    if task is Task.MULTIMODAL:
        try:
            multimodal = MultimodalSpec.from_dicts(transforms)
        except ConfigError as e:
            problems.extend(e.diagnostics)
        except (KeyError, TypeError, ValueError) as e:
            problems.append(f"multimodal.transforms: malformed entry ({e})")

    priors = exp.get('priors')
    config_kwargs = dict(
        name=str(exp.get('name', 'experiment')),
        setting=setting or Setting.ASYNDGAN,
        task=task or Task.MIXTURE,
        nodes=tuple(nodes),
        subset=number('experiment', 'subset', int),
        priors=None if priors is None else tuple(float(p) for p in priors),
        rounds=number('experiment', 'rounds', int),
        disc_steps=number('experiment', 'disc_steps', int),
        batch_size=number('experiment', 'batch_size', int),
        seed=number('experiment', 'seed', int),
        log_interval=number('experiment', 'log_interval', int),
        condition_dim=number('experiment', 'condition_dim', int),
        sample_dim=number('experiment', 'sample_dim', int),
        modality_count=number('experiment', 'modality_count', int),
        condition_variance=number('experiment', 'condition_variance'),
        sample_scale=number('experiment', 'sample_scale'),
        condition_scale=number('experiment', 'condition_scale'),
        label_resolution=number('multimodal', 'label_resolution'),
        loss=loss or LossConfig(),
        optimizer=AdamConfig(
            learning_rate=number('optimizer', 'learning_rate'),
            beta1=number('optimizer', 'beta1'),
            beta2=number('optimizer', 'beta2'),
            eps=number('optimizer', 'eps'),
        ),
        generator=GeneratorConfig(
            hidden=tuple(int(h) for h in full['generator'].get('hidden', (64, 64))),
            activation=activation or Activation.TANH,
            dropout=number('generator', 'dropout'),
        ),
        discriminator=DiscriminatorConfig(
            hidden=tuple(int(h) for h in full['discriminator'].get('hidden', (64, 64))),
            leaky_slope=number('discriminator', 'leaky_slope'),
        ),
        multimodal=multimodal,
        protocol=ProtocolConfig(
            transport=str(full['protocol'].get('transport', 'inproc')),
            recv_timeout=number('protocol', 'recv_timeout'),
            baseline_parameters=number('protocol', 'baseline_parameters', int),
        ),
        evaluation=EvaluationConfig(
            eval_samples=number('evaluation', 'eval_samples', int),
            coverage_radius=number('evaluation', 'coverage_radius'),
            scatter_points=number('evaluation', 'scatter_points', int),
        ),
        theory=TheoryConfig(
            enabled=bool(full['theory'].get('enabled', False)),
            trials=number('theory', 'trials', int),
            perturbations=number('theory', 'perturbations', int),
        ),
        source=source,
    )
    config = ExperimentConfig(**config_kwargs)
    problems.extend(validate(config))
    if problems:
        raise ConfigError(problems)
    return config


def validate(config: ExperimentConfig) -> List[str]:
    """Every field-level problem with an assembled config; empty when valid"""
    problems: List[str] = []
    n, c = config.n_nodes, config.modality_count

    if n == 0:
        problems.append("nodes: at least one node is required")
    if c < 1:
        problems.append(f"experiment.modality_count: must be >= 1 (got {c})")
    if config.sample_dim != 2:
        problems.append(f"experiment.sample_dim: toy samples are 2-D (got {config.sample_dim})")
    if config.condition_dim < 1:
        problems.append(f"experiment.condition_dim: must be >= 1 (got {config.condition_dim})")
    if config.condition_variance <= 0:
        problems.append(f"experiment.condition_variance: must be > 0 (got {config.condition_variance})")
    for key in ('sample_scale', 'condition_scale'):
        if getattr(config, key) <= 0:
            problems.append(f"experiment.{key}: must be > 0 (got {getattr(config, key)})")

    for field_name, minimum in (('rounds', 0), ('disc_steps', 1), ('batch_size', 1), ('log_interval', 1)):
        value = getattr(config, field_name)
        if value < minimum:
            problems.append(f"experiment.{field_name}: must be >= {minimum} (got {value})")
    if not 0 <= config.seed < 2 ** 64:
        problems.append(f"experiment.seed: must fit an unsigned 64-bit integer (got {config.seed})")

    if config.setting in (Setting.SYN_SUBSET, Setting.SYN_PLUS_REAL) and not 1 <= config.subset <= max(n, 1):
        problems.append(f"experiment.subset: must be in 1..{n} (got {config.subset})")

    # modality sets
    covered = set()
    for i, node in enumerate(config.nodes):
        mods = set(node.modalities)
        if not mods:
            problems.append(f"nodes[{i}].modalities: must not be empty")
        if len(mods) != len(node.modalities):
            problems.append(f"nodes[{i}].modalities: duplicate entries {list(node.modalities)}")
        outside = sorted(k for k in mods if not 1 <= k <= c)
        if outside:
            problems.append(f"nodes[{i}].modalities: {outside} outside 1..{c}")
        covered |= mods
    if n and c >= 1:
        missing = sorted(set(range(1, c + 1)) - covered)
        if missing:
            problems.append(f"nodes.modalities: modalities {missing} are held by no node and cannot be trained")

    if config.task is Task.MIXTURE and c != 1:
        problems.append(f"experiment.modality_count: the mixture task has one modality (got {c})")
    if config.task is Task.MULTIMODAL:
        if config.condition_dim != 2:
            problems.append(f"experiment.condition_dim: the multimodal task conditions on the 2-D base point "
                            f"(got {config.condition_dim})")
        if config.multimodal is not None and config.multimodal.c != c:
            problems.append(f"multimodal.transforms: {config.multimodal.c} transforms for {c} modalities")
        if config.setting is Setting.SYN_PLUS_REAL:
            problems.append("experiment.setting: syn_plus_real is defined for the mixture task only")
        if config.label_resolution <= 0:
            problems.append(f"multimodal.label_resolution: must be > 0 (got {config.label_resolution})")

    if config.priors is not None:
        priors = np.asarray(config.priors, dtype=np.float64)
        if config.setting in (Setting.SYN_ALL, Setting.SYN_SUBSET):
            problems.append("priors: explicit priors apply to the asyndgan settings only")
        elif len(priors) != n:
            problems.append(f"priors: {len(priors)} values for {n} nodes")
        elif np.any(priors < 0):
            problems.append(f"priors: must be non-negative (got {priors.tolist()})")
        elif abs(priors.sum() - 1.0) > PRIOR_TOLERANCE:
            problems.append(f"priors: must sum to 1 (got {priors.sum():g})")

    opt = config.optimizer
    if opt.learning_rate <= 0:
        problems.append(f"optimizer.learning_rate: must be > 0 (got {opt.learning_rate})")
    for key in ('beta1', 'beta2'):
        if not 0 <= getattr(opt, key) < 1:
            problems.append(f"optimizer.{key}: must be in [0, 1) (got {getattr(opt, key)})")
    if opt.eps <= 0:
        problems.append(f"optimizer.eps: must be > 0 (got {opt.eps})")

    if not 0 <= config.generator.dropout < 1:
        problems.append(f"generator.dropout: must be in [0, 1) (got {config.generator.dropout})")
    for section, hidden in (('generator', config.generator.hidden), ('discriminator', config.discriminator.hidden)):
        if not hidden or any(h < 1 for h in hidden):
            problems.append(f"{section}.hidden: needs at least one positive width (got {list(hidden)})")
    if config.discriminator.leaky_slope < 0:
        problems.append(f"discriminator.leaky_slope: must be >= 0 (got {config.discriminator.leaky_slope})")

    proto = config.protocol
    if proto.transport not in TRANSPORT_KINDS:
        problems.append(f"protocol.transport: {proto.transport!r} is not one of {', '.join(TRANSPORT_KINDS)}")
    if proto.recv_timeout <= 0:
        problems.append(f"protocol.recv_timeout: must be > 0 (got {proto.recv_timeout})")
    if proto.baseline_parameters < 0:
        problems.append(f"protocol.baseline_parameters: must be >= 0 (got {proto.baseline_parameters})")

    ev = config.evaluation
    if ev.coverage_radius <= 0:
        problems.append(f"evaluation.coverage_radius: must be > 0 (got {ev.coverage_radius})")
    elif n > 1:
        centers = np.array([node.center for node in config.nodes])
        gaps = [np.linalg.norm(a - b) for i, a in enumerate(centers) for b in centers[i + 1:]]
        if min(gaps) <= 2 * ev.coverage_radius:
            problems.append(f"evaluation.coverage_radius: discs of radius {ev.coverage_radius} around "
                            f"node centers overlap (closest pair {min(gaps):g} apart)")
    if ev.eval_samples < 0 or ev.scatter_points < 0:
        problems.append("evaluation: eval_samples and scatter_points must be >= 0")

    if config.theory.trials < 1 or config.theory.perturbations < 1:
        problems.append("theory: trials and perturbations must be >= 1")
    return problems


def list_bundled_experiments() -> List[str]:
    return sorted(p.stem for p in Path(EXPERIMENTS_DIR).glob("*.toml"))
