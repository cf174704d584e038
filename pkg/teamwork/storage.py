"""JSON and CSV persistence of games, policies, populations, priors and
results.

JSON files are written with sorted keys and a trailing newline; floats keep
their shortest round-trip representation so that reloading is exact.
"""
from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import FormatError
from .exact import EvalReport, Prior
from .game import (RepeatedGame, ScenarioSet, history_key,
                   parse_history_key)
from .policies.base import Policy
from .policies.population import PolicySet
from .policies.rules import RulePolicy
from .policies.tabular import SoftmaxPolicy, StochasticPolicy

log = logging.getLogger(__name__)

PathLike = Union[str, Path]


def load_json(path: PathLike) -> Any:
    path = Path(path)
    try:
        with path.open('r') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, path, e.lineno, e.colno) from None
    except OSError as e:
        raise FormatError(e.strerror or str(e), path) from None


def save_json(obj: Any, path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='\n') as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write('\n')


def _need(d: Any, key: str, path: PathLike, where: str = '') -> Any:
    if not isinstance(d, dict):
        raise FormatError(f'{where or "document"} must be an object', path)
    try:
        return d[key]
    except KeyError:
        raise FormatError(f'missing key {where + "." if where else ""}{key}',
                          path) from None


def load_game(path: PathLike) -> RepeatedGame:
    d = load_json(path)
    for key in ('actions', 'payoffs', 'horizon'):
        _need(d, key, path)
    try:
        return RepeatedGame.from_dict(d)
    except (ValueError, TypeError) as e:
        raise FormatError(str(e), path) from None


def save_game(game: RepeatedGame, path: PathLike):
    save_json(game.to_dict(), path)


def _table_to_dict(table: np.ndarray, game: RepeatedGame) -> dict[str, list]:
    return {
        history_key(h, game.actions): [float(x) for x in row]
        for h, row in zip(game.tree.histories(), table)
    }


def _table_from_dict(d: Mapping[str, Sequence[float]], game: RepeatedGame,
                     path: PathLike, where: str) -> np.ndarray:
    tree = game.tree
    table = np.full((tree.num_nodes, tree.num_actions), np.nan)
    for key, row in d.items():
        try:
            node = tree.node_id(
                parse_history_key(key, game.actions, game.num_players))
        except (ValueError, KeyError) as e:
            raise FormatError(f'{where}: {e}', path) from None
        if len(row) != tree.num_actions:
            raise FormatError(
                f'{where}: row {key!r} has {len(row)} entries, expected '
                f'{tree.num_actions}', path)
        table[node] = row
    missing = np.flatnonzero(np.isnan(table).any(axis=1))
    if len(missing):
        keys = [
            history_key(tree.history_of(int(n)), game.actions)
            for n in missing[:3]
        ]
        raise FormatError(
            f'{where}: {len(missing)} histories missing, e.g. {keys}', path)
    return table


def policy_to_dict(policy: Policy, game: RepeatedGame) -> dict[str, Any]:
    """Rule policies keep their rule, everything else is written as a
    table keyed by history."""
    ret: dict[str, Any] = {'name': policy.name}
    if isinstance(policy, RulePolicy):
        ret['rule'] = policy.rule
        ret['params'] = policy.params
        return ret
    ret['table'] = _table_to_dict(policy.table(game), game)
    if isinstance(policy, SoftmaxPolicy):
        ret['theta'] = _table_to_dict(policy.theta, game)
    meta = getattr(policy, 'meta', None)
    if meta:
        ret['meta'] = meta
    return ret


def policy_from_dict(d: Mapping[str, Any],
                     game: RepeatedGame,
                     path: PathLike = '<policy>',
                     name: Optional[str] = None) -> Policy:
    name = name or d.get('name')
    where = f'policy {name!r}'
    if 'rule' in d:
        params = dict(d.get('params') or {})
        try:
            return RulePolicy(d['rule'], game.actions, name=name, **params)
        except (TypeError, ValueError) as e:
            raise FormatError(f'{where}: {e}', path) from None
    if 'theta' in d:
        theta = _table_from_dict(d['theta'], game, path, where)
        return SoftmaxPolicy(game, theta, name)
    if 'table' in d:
        table = _table_from_dict(d['table'], game, path, where)
        try:
            return StochasticPolicy(game, table, name, d.get('meta'))
        except ValueError as e:
            raise FormatError(f'{where}: {e}', path) from None
    raise FormatError(f'{where} needs one of rule, table or theta', path)


def load_policy(path: PathLike, game: RepeatedGame) -> Policy:
    return policy_from_dict(load_json(path), game, path)


def save_policy(policy: Policy, path: PathLike, game: RepeatedGame):
    save_json(policy_to_dict(policy, game), path)


def load_population(path: PathLike, game: RepeatedGame) -> PolicySet:
    """Read ``{"policies": [...]}``; an entry may point to a policy file
    relative to the population file with ``"file"``."""
    path = Path(path)
    d = load_json(path)
    entries = _need(d, 'policies', path)
    if not isinstance(entries, list) or not entries:
        raise FormatError('policies must be a non-empty list', path)
    ret = PolicySet()
    for i, entry in enumerate(entries):
        name = _need(entry, 'name', path, f'policies[{i}]')
        if 'file' in entry:
            sub = path.parent / entry['file']
            policy = policy_from_dict(load_json(sub), game, sub, name)
        else:
            policy = policy_from_dict(entry, game, path, name)
        try:
            ret.add(policy, entry.get('label'))
        except ValueError as e:
            raise FormatError(str(e), path) from None
    log.debug('loaded %d policies from %s', len(ret), path)
    return ret


def save_population(population: PolicySet, path: PathLike,
                    game: RepeatedGame):
    entries = []
    for name, policy in population.items():
        entry = policy_to_dict(policy, game)
        if name in population.labels:
            entry['label'] = population.labels[name]
        entries.append(entry)
    save_json({'policies': entries}, path)


def prior_to_dict(prior: Prior, scenario_set: ScenarioSet) -> dict:
    return {
        'scenarios': scenario_set.ids,
        'weights': [float(w) for w in prior.weights],
    }


def load_prior(path: PathLike, scenario_set: ScenarioSet) -> Prior:
    """Read a prior and reorder it to ``scenario_set``."""
    d = load_json(path)
    ids = _need(d, 'scenarios', path)
    weights = _need(d, 'weights', path)
    if len(ids) != len(weights):
        raise FormatError(
            f'{len(ids)} scenarios but {len(weights)} weights', path)
    if sorted(ids) != sorted(scenario_set.ids):
        raise FormatError('prior scenarios do not match the scenario set',
                          path)
    lookup = dict(zip(ids, weights))
    try:
        return Prior(np.array([lookup[i] for i in scenario_set.ids]),
                     scenario_set)
    except ValueError as e:
        raise FormatError(str(e), path) from None


def save_prior(prior: Prior, path: PathLike, scenario_set: ScenarioSet):
    save_json(prior_to_dict(prior, scenario_set), path)


def _cell(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return 'true' if x else 'false'
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path: PathLike, header: Sequence[str],
              rows: Iterable[Sequence[Any]]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(x) for x in row])


def read_csv(path: PathLike) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    try:
        with path.open('r', newline='') as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None:
                raise FormatError('empty CSV file', path, 1)
            rows = []
            for row in reader:
                if len(row) != len(header):
                    raise FormatError(
                        f'{len(row)} fields, expected {len(header)}', path,
                        reader.line_num)
                rows.append(row)
            return header, rows
    except OSError as e:
        raise FormatError(e.strerror or str(e), path) from None


def write_dict_rows(path: PathLike, rows: Sequence[Mapping[str, Any]],
                    header: Optional[Sequence[str]] = None):
    if header is None:
        header = list(rows[0]) if rows else []
    write_csv(path, header, ([r[k] for k in header] for r in rows))


METRICS_COLUMNS = ('method', 'scenario_set', 'u_avg', 'u_min', 'r_max',
                   'exact_br')
SWEEP_COLUMNS = ('method', 'epsilon', 'u_avg', 'u_min', 'r_max')
REPORT_COLUMNS = ('scenario_id', 'utility', 'best_response', 'exact_flag',
                  'regret')


def write_trace(trace, path: PathLike):
    write_csv(path, trace.columns(), trace.rows())


def read_trace(path: PathLike) -> tuple[list[str], np.ndarray]:
    header, rows = read_csv(path)
    try:
        return header, np.array([[float(x) for x in r] for r in rows])
    except ValueError as e:
        raise FormatError(str(e), path) from None


def write_metrics(records: Sequence, path: PathLike):
    write_dict_rows(path, [r.row() for r in records], METRICS_COLUMNS)


def write_sweep(rows: Sequence, path: PathLike):
    write_dict_rows(path, [r.row() for r in rows], SWEEP_COLUMNS)


def write_report(report: EvalReport, path: PathLike):
    """CSV or JSON depending on the file suffix."""
    path = Path(path)
    if path.suffix.lower() == '.json':
        save_json(report.to_dict(), path)
    else:
        write_dict_rows(path, report.rows(), REPORT_COLUMNS)


def save_artifacts(result, out_dir: PathLike, game: RepeatedGame) -> Path:
    """Write ``policy.json``, ``prior.json``, ``trace.csv`` and
    ``config.json`` of a training result."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_policy(result.policy, out_dir / 'policy.json', game)
    save_prior(result.prior, out_dir / 'prior.json',
               result.prior.scenario_set)
    write_trace(result.trace, out_dir / 'trace.csv')
    save_json(result.config.to_dict(), out_dir / 'config.json')
    log.info('artifacts written to %s', out_dir)
    return out_dir
