import logging
from pathlib import Path

import click

from .errors import (DivergenceError, EnumerationLimitError, EpsilonNetError,
                     FormatError, InvalidDistributionError,
                     UnknownHistoryError)
from .version import __version__

log = logging.getLogger(__name__)

DEFAULT_GAME = Path(__file__).parent / 'data' / 'ipd.json'

DOMAIN_ERRORS = (FormatError, EnumerationLimitError, EpsilonNetError,
                 InvalidDistributionError, UnknownHistoryError, ValueError,
                 KeyError)


class Main(click.Group):
    """Maps domain errors to exit codes."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except DivergenceError as e:
            log.error('%s', e)
            click.echo(f'Error: {e}', err=True)
            ctx.exit(2)
        except DOMAIN_ERRORS as e:
            msg = e.args[0] if isinstance(e, KeyError) and e.args else e
            raise click.ClickException(str(msg)) from e


def _numbers(text, kind=float):
    try:
        return [kind(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise click.BadParameter(f'expected a comma separated list, got '
                                 f'{text!r}') from None


def _game(path):
    from .storage import load_game
    return load_game(path or DEFAULT_GAME)


def _population(source, game):
    from .policies import canonical9
    from .storage import load_population
    if source == 'canonical9':
        return canonical9(game)
    return load_population(source, game)


def _policy(source, game):
    from .policies import StochasticPolicy
    from .storage import load_policy
    if source == 'random':
        return StochasticPolicy.uniform(game, 'random')
    return load_policy(source, game)


def _progress(name, every):
    from .progress import LogReporter, Progress
    progress = Progress(name=name)
    reporter = LogReporter(every)
    reporter.listen(progress)
    return progress, reporter


game_option = click.option('--game',
                           type=click.Path(exists=True, dir_okay=False),
                           default=None,
                           help='Game file, the bundled IPD by default.')
population_option = click.option(
    '--population',
    default='canonical9',
    show_default=True,
    help='Population file or the name canonical9.')
workers_option = click.option('--workers',
                              type=int,
                              default=None,
                              help='Threads for per-scenario work.')


@click.group(cls=Main)
@click.version_option(__version__)
@click.option('-v', '--verbose', count=True, help='-v info, -vv debug.')
def main(verbose):
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(verbose, 2)]
    logging.basicConfig(level=level,
                        format='%(asctime)s %(levelname)s %(name)s: '
                        '%(message)s')


@main.command('gen-background')
@game_option
@click.option('--set',
              'name',
              type=click.Choice(['canonical9']),
              default='canonical9',
              show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), required=True)
def gen_background(game, name, out):
    """Write a hand written background population."""
    from .storage import save_population
    g = _game(game)
    population = _population(name, g)
    save_population(population, out, g)
    click.echo(f'{len(population)} policies written to {out}')


@main.command()
@click.option('--method',
              type=click.Choice(['mu', 'mr', 'pbr', 'sp', 'fp', 'random'],
                                case_sensitive=False),
              required=True)
@click.option('--config',
              'config_file',
              type=click.Path(exists=True, dir_okay=False),
              default=None,
              help='Solver configuration (JSON).')
@game_option
@population_option
@click.option('--iterations', type=int, default=None)
@click.option('--seed', type=int, default=None)
@click.option('--mode',
              type=click.Choice(['exact', 'stochastic']),
              default=None)
@click.option('--out-dir', type=click.Path(file_okay=False), required=True)
@workers_option
def train(method, config_file, game, population, iterations, seed, mode,
          out_dir, workers):
    """Train a focal policy and write policy, prior and trace."""
    from .config import BaseConfig, solver_config
    from .solvers import train as run_training
    from .storage import save_artifacts

    g = _game(game)
    pop = _population(population, g)
    cfg = BaseConfig(config_file)
    config = solver_config(cfg,
                           method,
                           iterations=iterations,
                           seed=seed,
                           mode=mode)
    progress, _reporter = _progress(config.method,
                                    max(1, config.iterations // 20))
    with progress:
        result = run_training(config, g, pop, progress=progress,
                              workers=workers)
    save_artifacts(result, out_dir, g)
    last = result.trace.selected_record
    click.echo(f'{config.method}: u_min={last.u_min!r} r_max={last.r_max!r} '
               f'bayes_utility={last.bayes_utility!r}')


@main.command()
@click.option('--policy',
              required=True,
              help='Policy file or the name random.')
@game_option
@population_option
@click.option('--scenarios',
              default='train',
              show_default=True,
              help='train, or a test population file.')
@click.option('--prior',
              type=click.Path(exists=True, dir_okay=False),
              default=None,
              help='Prior used for the Bayesian columns of the report.')
@click.option('--label', default=None, help='Method column of the CSV.')
@click.option('--out', type=click.Path(dir_okay=False), required=True)
@click.option('--report',
              type=click.Path(dir_okay=False),
              default=None,
              help='Per-scenario report, CSV or JSON by suffix.')
@workers_option
def evaluate(policy, game, population, scenarios, prior, label, out, report,
             workers):
    """Average, worst-case utility and worst-case regret of a policy."""
    from .evaluation import evaluate_metrics, test_scenario_set
    from .exact import ResponseCache, evaluate_report
    from .game import build_scenario_set
    from .storage import (load_population, load_prior, write_metrics,
                          write_report)

    g = _game(game)
    pi = _policy(policy, g)
    if scenarios == 'train':
        pop = _population(population, g)
        scenario_set = build_scenario_set(g, pop)
    else:
        pop = load_population(scenarios, g)
        scenario_set = test_scenario_set(g, pop)
    cache = ResponseCache(pop)
    record = evaluate_metrics(pi, scenario_set, pop, cache, label
                              or pi.name, workers)
    write_metrics([record], out)
    if report:
        weights = None if prior is None else load_prior(prior, scenario_set)
        write_report(
            evaluate_report(pi, scenario_set, pop, weights, cache, workers),
            report)
    click.echo(f'u_avg={record.u_avg!r} u_min={record.u_min!r} '
               f'r_max={record.r_max!r}')


@main.command('gen-testset')
@game_option
@population_option
@click.option('--epsilon', type=float, required=True)
@click.option('--count', type=int, default=512, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), required=True)
def gen_testset(game, population, epsilon, count, seed, out):
    """Sample test partners within epsilon of a population."""
    from .evaluation import generate_test_population
    from .storage import save_population

    g = _game(game)
    test_pop = generate_test_population(_population(population, g), epsilon,
                                        count, seed, g)
    save_population(test_pop, out, g)
    click.echo(f'{len(test_pop)} test policies written to {out}')


@main.command('sweep-epsilon')
@click.option('--policy',
              'policies',
              multiple=True,
              required=True,
              help='METHOD=FILE, repeatable.')
@game_option
@population_option
@click.option('--epsilons',
              default='0,0.25,0.5,0.75,1.0',
              show_default=True)
@click.option('--count', type=int, default=512, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), required=True)
@workers_option
def sweep_epsilon(policies, game, population, epsilons, count, seed, out,
                  workers):
    """Test metrics of trained policies over a grid of epsilon."""
    from .evaluation import sweep_epsilon as run_sweep
    from .storage import write_sweep

    g = _game(game)
    trained = {}
    for item in policies:
        method, sep, path = item.partition('=')
        if not sep:
            raise click.BadParameter(f'expected METHOD=FILE, got {item!r}')
        trained[method] = _policy(path, g)
    rows = run_sweep(trained, _population(population, g), g,
                     _numbers(epsilons), count, seed, workers)
    write_sweep(rows, out)
    click.echo(f'{len(rows)} rows written to {out}')


@main.command()
@game_option
@population_option
@click.option('--epsilon', type=float, required=True)
@click.option('--count', type=int, default=512, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--num-policies', type=int, default=100, show_default=True)
@click.option('--mu', type=click.Path(exists=True, dir_okay=False))
@click.option('--mr', type=click.Path(exists=True, dir_okay=False))
@click.option('--out', type=click.Path(dir_okay=False), default=None)
def audit(game, population, epsilon, count, seed, num_policies, mu, mr, out):
    """Check the epsilon-closeness bounds on a generated test set."""
    from .evaluation import (audit_epsilon_bounds, generate_test_population,
                             test_scenario_set)
    from .game import build_scenario_set
    from .storage import save_json

    g = _game(game)
    pop = _population(population, g)
    test_pop = generate_test_population(pop, epsilon, count, seed, g)
    trained = {}
    if mu:
        trained['MU'] = _policy(mu, g)
    if mr:
        trained['MR'] = _policy(mr, g)
    report = audit_epsilon_bounds(build_scenario_set(g, pop), pop,
                                  test_scenario_set(g, test_pop), test_pop,
                                  epsilon, num_policies, seed, trained)
    if out:
        save_json(report.to_dict(), out)
    click.echo(f'max |dU| = {report.max_utility_gap!r} '
               f'(bound {report.utility_bound!r})')
    click.echo(f'max |dR| = {report.max_regret_gap!r} '
               f'(bound {report.regret_bound!r})')
    for method, slack in report.guarantee_slack.items():
        click.echo(f'{method} slack = {slack!r}')
    if not report.passed:
        raise click.ClickException('epsilon audit failed')


@main.command('check-population')
@click.argument('population', default='canonical9')
@game_option
def check_population(population, game):
    """Report best/min response gaps of every scenario."""
    g = _game(game)
    from .evaluation import check_non_degenerative
    report = check_non_degenerative(_population(population, g), g)
    flag = 'true' if report.non_degenerative else 'false'
    click.echo(f'non-degenerative: {flag}')
    for sid, gap in report.gaps.items():
        click.echo(f'{sid}\t{gap!r}')


@main.command('train-background')
@game_option
@click.option('--subpops', default='2,3,5', show_default=True)
@click.option('--prefs-seed', type=int, default=0, show_default=True)
@click.option('--iterations', type=int, default=1000, show_default=True)
@click.option('--eta', type=float, default=0.5, show_default=True)
@click.option('--out', type=click.Path(dir_okay=False), required=True)
def train_background(game, subpops, prefs_seed, iterations, eta, out):
    """Train sub-populations by population play on social rewards."""
    from .solvers import train_background as run_pp
    from .storage import save_population

    g = _game(game)
    progress, _reporter = _progress('pp', max(1, iterations // 10))
    with progress:
        pop = run_pp(g,
                     _numbers(subpops, int),
                     seed=prefs_seed,
                     iterations=iterations,
                     eta=eta,
                     progress=progress)
    save_population(pop, out, g)
    click.echo(f'{len(pop)} policies written to {out}')


@main.command()
@click.option('--manifest',
              type=click.Path(exists=True, dir_okay=False),
              required=True)
def run(manifest):
    """Train every configured method and write train/test metrics."""
    from .config import ExperimentManifest
    from .evaluation import (evaluate_metrics, generate_test_population,
                             sweep_epsilon as run_sweep, test_scenario_set)
    from .exact import ResponseCache
    from .game import build_scenario_set
    from .solvers import train as run_training
    from .storage import save_artifacts, write_metrics, write_sweep

    m = ExperimentManifest.load(manifest)
    g = _game(m.game)
    pop = _population(str(m.population), g)
    train_set = build_scenario_set(g, pop)
    train_cache = ResponseCache(pop, m.seed)
    test_pop = generate_test_population(pop, m.test_epsilon, m.test_count,
                                        m.test_seed, g)
    test_set = test_scenario_set(g, test_pop)
    test_cache = ResponseCache(test_pop, m.seed)

    records, trained = [], {}
    for method, config in m.configs.items():
        progress, _reporter = _progress(method,
                                        max(1, config.iterations // 20))
        with progress:
            result = run_training(config, g, pop, train_set, train_cache,
                                  progress, m.workers)
        save_artifacts(result, m.out_dir / method.lower(), g)
        trained[method] = result.policy
        records.append(
            evaluate_metrics(result.policy, train_set, pop, train_cache,
                             method, m.workers))
        records.append(
            evaluate_metrics(result.policy, test_set, test_pop, test_cache,
                             method, m.workers))
        log.info('%s done', method)
    write_metrics(records, m.out_dir / 'metrics.csv')
    if m.sweep_epsilons:
        write_sweep(
            run_sweep(trained, pop, g, m.sweep_epsilons, m.test_count,
                      m.test_seed, m.workers), m.out_dir / 'sweep.csv')
    click.echo(f'results written to {m.out_dir}')


if __name__ == '__main__':
    main()
