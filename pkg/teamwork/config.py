from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from .errors import FormatError
from .solvers.config import METHODS, SolverConfig
from .storage import load_json


def queryKey(q: str, dct: dict, prefix: Optional[list[str]] = None) -> Any:
    if prefix is None:
        prefix = []

    keys = q.split('.', maxsplit=1)

    if not isinstance(dct, dict):
        k = '.'.join(prefix)
        raise KeyError(
            f"Query {k}.{q} error, type '{k}' is {type(dct)}, not dict.")
    try:
        sub = dct[keys[0]]
    except KeyError:
        k = '.'.join([*prefix, keys[0]])
        raise KeyError(
            f"Query {'.'.join([*prefix, q])} error, key '{k}' not found.")

    if len(keys) == 1:
        return sub
    return queryKey(keys[1], sub, [*prefix, keys[0]])


def query(q, dct: dict, prefix: Optional[list[str]] = None):
    if isinstance(q, str):
        return queryKey(q, dct, prefix)
    elif isinstance(q, list):
        return [query(sub_q, dct, prefix) for sub_q in q]
    elif isinstance(q, tuple):
        return tuple([query(sub_q, dct, prefix) for sub_q in q])
    elif isinstance(q, set):
        return {sub_q: query(sub_q, dct, prefix) for sub_q in q}
    raise TypeError(f'unsupported query {q!r}')


class ConfigSection(dict):
    """A dict with attribute access whose nested dicts are sections too."""

    def __init__(self, key: Optional[str] = None):
        super().__init__()
        self._key_ = key

    def __setitem__(self, key: str, value: Any) -> None:
        if isinstance(value, dict) and not isinstance(value, ConfigSection):
            k = key if self._key_ is None else '.'.join([self._key_, key])
            d = ConfigSection(k)
            d.update(value)
            value = d
        super().__setitem__(key, value)

    def update(self, other=(), **kwds):
        for k, v in dict(other, **kwds).items():
            self[k] = v

    def __getattr__(self, name: str) -> Any:
        if name.startswith('_'):
            raise AttributeError(name)
        try:
            return self[name]
        except KeyError:
            raise AttributeError(f'Not Find Attr: {name}') from None

    def __deepcopy__(self, memo):
        return {k: copy.deepcopy(v, memo) for k, v in self.items()}

    def query(self, q: Union[str, set, tuple, list]):
        prefix = [] if self._key_ is None else self._key_.split('.')
        return query(q, self, prefix=prefix)

    def get_path(self, q: str, default: Any = None) -> Any:
        """Like ``query`` but returns ``default`` for a missing key."""
        try:
            return self.query(q)
        except KeyError:
            return default


class BaseConfig(ConfigSection):
    """A JSON configuration file."""

    def __init__(self, path: Optional[Union[str, Path]] = None):
        super().__init__(None)
        if isinstance(path, str):
            path = Path(path)
        self._path_ = path
        if path is not None:
            self.reload()

    @property
    def path(self) -> Optional[Path]:
        return self._path_

    def reload(self):
        dct = load_json(self._path_)
        if not isinstance(dct, dict):
            raise FormatError('configuration must be a JSON object',
                              self._path_)
        self.clear()
        self.update(dct)

    @classmethod
    def fromdict(cls, d: dict) -> BaseConfig:
        ret = cls()
        ret.update(d)
        return ret

    def resolve(self, name: str) -> Path:
        """A file name relative to the configuration file."""
        p = Path(name)
        if p.is_absolute() or self._path_ is None:
            return p
        return self._path_.parent / p


def solver_config(cfg: ConfigSection,
                  method: Optional[str] = None,
                  bare: Optional[bool] = None,
                  **overrides) -> SolverConfig:
    """``SolverConfig`` from a config file.

    Keys of the ``solver`` section apply to every method; a
    ``methods.<METHOD>`` section overrides them.  A bare file without a
    ``solver`` section is read as the solver section itself.
    """
    if bare is None:
        bare = 'solver' not in cfg and 'methods' not in cfg
    d = dict(cfg) if bare else dict(cfg.get_path('solver', {}))
    d.pop('__version__', None)
    if method is not None:
        method = method.upper()
        for name, sub in dict(cfg.get_path('methods', {})).items():
            if name.upper() == method:
                d.update(sub or {})
        d['method'] = method
    d.update({k: v for k, v in overrides.items() if v is not None})
    return SolverConfig.from_dict(d)


@dataclass
class ExperimentManifest():
    """Everything one ``run`` needs.

    ``population`` is a population file or the name ``canonical9``.
    """
    game: Optional[Path]
    population: Union[Path, str]
    configs: dict[str, SolverConfig]
    test_epsilon: float = 0.5
    test_count: int = 512
    test_seed: int = 1
    sweep_epsilons: list[float] = field(default_factory=list)
    out_dir: Path = Path('results')
    seed: int = 0
    workers: Optional[int] = None

    @classmethod
    def from_config(cls, cfg: BaseConfig) -> ExperimentManifest:
        seed = cfg.get_path('seed', 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ValueError(f'manifest seed must be an integer, got {seed!r}')
        methods = cfg.get_path('methods', {m: {} for m in METHODS})
        configs = {}
        for name in methods:
            conf = solver_config(cfg, name, bare=False)
            if 'seed' not in cfg.get_path('solver', {}) and 'seed' not in (
                    methods[name] or {}):
                conf = conf.replace(seed=seed)
            configs[conf.method] = conf
        game = cfg.get_path('game')
        population = cfg.query('population')
        if population != 'canonical9':
            population = cfg.resolve(population)
        return cls(game=None if game is None else cfg.resolve(game),
                   population=population,
                   configs=configs,
                   test_epsilon=float(cfg.get_path('testset.epsilon', 0.5)),
                   test_count=int(cfg.get_path('testset.count', 512)),
                   test_seed=int(cfg.get_path('testset.seed', seed + 1)),
                   sweep_epsilons=[
                       float(e) for e in cfg.get_path('sweep.epsilons', [])
                   ],
                   out_dir=cfg.resolve(cfg.get_path('out_dir', 'results')),
                   seed=seed,
                   workers=cfg.get_path('workers'))

    @classmethod
    def load(cls, path: Union[str, Path]) -> ExperimentManifest:
        return cls.from_config(BaseConfig(path))
