import copy
import json
from pathlib import Path

import pytest

from teamwork.config import (BaseConfig, ConfigSection, ExperimentManifest,
                             query, solver_config)
from teamwork.errors import FormatError
from teamwork.solvers import METHODS

config = {
    '__version__': 1,
    'game': 'ipd.json',
    'population': 'canonical9',
    'seed': 11,
    'solver': {
        'iterations': 200,
        'eta_theta': 0.1,
    },
    'methods': {
        'MU': {
            'eta_beta': 0.2
        },
        'mr': {},
        'SP': {
            'seed': 3
        },
    },
    'testset': {
        'epsilon': 0.25,
        'count': 64
    },
    'sweep': {
        'epsilons': [0, 0.5]
    },
}


def test_query():
    assert query('solver.iterations', config) == 200
    assert query(('seed', 'testset.count'), config) == (11, 64)
    assert query({'seed'}, config) == {'seed': 11}
    with pytest.raises(KeyError, match="key 'solver.steps' not found"):
        query('solver.steps', config)
    with pytest.raises(KeyError, match="type 'seed'"):
        query('seed.x', config)


def test_config_section():
    cfg = BaseConfig.fromdict(config)
    assert isinstance(cfg.solver, ConfigSection)
    assert cfg.methods.MU.eta_beta == 0.2
    assert cfg.testset.query('count') == 64
    assert cfg.get_path('testset.seed', 5) == 5
    with pytest.raises(AttributeError):
        cfg.nothing
    cfg2 = copy.deepcopy(cfg)
    assert isinstance(cfg2, dict)
    assert not isinstance(cfg2, ConfigSection)


def test_config_file(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps(config))
    cfg = BaseConfig(str(path))
    assert cfg.path == path
    assert cfg.resolve('ipd.json') == tmp_path / 'ipd.json'
    assert cfg.resolve('/abs/x.json') == Path('/abs/x.json')
    path.write_text('[1, 2]')
    with pytest.raises(FormatError):
        cfg.reload()


def test_solver_config():
    cfg = BaseConfig.fromdict(config)
    mu = solver_config(cfg, 'mu')
    assert mu.method == 'MU'
    assert (mu.iterations, mu.eta_theta, mu.eta_beta) == (200, 0.1, 0.2)
    mr = solver_config(cfg, 'MR', iterations=10, seed=None)
    assert mr.iterations == 10 and mr.eta_beta == 0.1

    bare = BaseConfig.fromdict({'method': 'PBR', 'eta_theta': 0.3})
    pbr = solver_config(bare)
    assert pbr.method == 'PBR' and pbr.eta_theta == 0.3
    with pytest.raises(ValueError):
        solver_config(BaseConfig.fromdict({'eta': 1}))


def test_manifest(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps(config))
    m = ExperimentManifest.load(path)
    assert list(m.configs) == ['MU', 'MR', 'SP']
    assert m.configs['MU'].seed == 11
    assert m.configs['SP'].seed == 3
    assert m.game == tmp_path / 'ipd.json'
    assert m.population == 'canonical9'
    assert (m.test_epsilon, m.test_count, m.test_seed) == (0.25, 64, 12)
    assert m.sweep_epsilons == [0.0, 0.5]
    assert m.out_dir == tmp_path / 'results'

    d = {k: v for k, v in config.items() if k != 'methods'}
    m = ExperimentManifest.from_config(BaseConfig.fromdict(d))
    assert tuple(m.configs) == METHODS

    d['seed'] = 'x'
    with pytest.raises(ValueError):
        ExperimentManifest.from_config(BaseConfig.fromdict(d))
