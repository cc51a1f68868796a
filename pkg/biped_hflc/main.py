"""Main entry point for biped-hflc."""

import functools
import logging
import math
import os
import sys
from typing import Any, Dict, Optional, Sequence, Tuple

import click

from .anfis_train import evaluate
from .biped_model import generate_dataset
from .config import RunConfig, get_config
from .errors import HflcError, InvalidArgumentError
from .hflc_hierarchy import (
    closed_loop_walk,
    project_dataset,
    rule_count_report,
    summarize_walk,
    train_hierarchy,
)
from .persistence import (
    from_model_file,
    load_model,
    load_model_file,
    read_gait_csv,
    save_model,
    write_gait_csv,
    write_walk_log,
    write_text,
)
from .report_generator import render_study_report
from .study_harness import (
    SweepEntry,
    best_sizes,
    export_error_table,
    export_surface,
    format_error_table,
    run_sweep,
)

logger = logging.getLogger(__name__)


def setup_logging(config: RunConfig) -> None:
    """Setup logging configuration."""
    level = getattr(logging, config.log_level.upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    # stdout carries command results only
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if config.log_file:
        file_handler = logging.FileHandler(config.log_file)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)


def handle_errors(func):
    """Map library errors to a message on stderr and the matching exit code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except HflcError as e:
            click.echo(f"❌ {e}", err=True)
            sys.exit(e.exit_code)
        except OSError as e:
            click.echo(f"❌ I/O error: {e}", err=True)
            sys.exit(2)

    return wrapper


def _config(ctx: click.Context, overrides: Dict[str, Any]) -> RunConfig:
    """Run configuration with command flags layered on top."""
    config: RunConfig = ctx.obj['config']
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if not overrides:
        return config
    return RunConfig.from_flat(overrides, base=config)


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose logging')
@click.option('--log-file', help='Log file path')
@click.option('--config', '-c', 'config_path', type=click.Path(), help='KEY=VALUE configuration file')
@click.pass_context
def cli(ctx: click.Context, verbose: bool, log_file: Optional[str], config_path: Optional[str]) -> None:
    """Hierarchical neuro-fuzzy controller for a planar biped."""
    ctx.ensure_object(dict)

    try:
        overrides: Dict[str, Any] = {}
        if verbose:
            overrides['log_level'] = "DEBUG"
        if log_file:
            overrides['log_file'] = log_file
        config = get_config(config_path, overrides)

        setup_logging(config)
        ctx.obj['config'] = config

    except HflcError as e:
        click.echo(f"❌ Configuration error: {e}", err=True)
        sys.exit(e.exit_code)


@cli.command('gen-data')
@click.option('--n', 'n', type=int, help='Number of samples (default: n_samples)')
@click.option('--seed', type=int, help='Dataset seed (default: data_seed)')
@click.option('--out', '-o', required=True, type=click.Path(), help='Output CSV path')
@click.pass_context
@handle_errors
def gen_data(ctx: click.Context, n: Optional[int], seed: Optional[int], out: str) -> None:
    """Generate a gait dataset CSV."""
    if n is not None and n < 2:
        raise InvalidArgumentError(f"n must be >= 2, got {n}")
    config = _config(ctx, {'n_samples': n, 'data_seed': seed})
    samples = generate_dataset(config.biped, config.gait)
    write_gait_csv(samples, out)
    click.echo(f"{len(samples)} rows written to {out}")


@cli.command()
@click.option('--data', '-d', required=True, type=click.Path(), help='Training dataset CSV')
@click.option('--out', '-o', required=True, type=click.Path(), help='Model file path')
@click.option('--epochs', type=int, help='Training epochs')
@click.option('--seed', type=int, help='Base training seed')
@click.option('--workers', type=int, help='Parallel training workers')
@click.pass_context
@handle_errors
def train(
    ctx: click.Context,
    data: str,
    out: str,
    epochs: Optional[int],
    seed: Optional[int],
    workers: Optional[int],
) -> None:
    """Train the controller hierarchy on a dataset."""
    config = _config(ctx, {'epochs': epochs, 'train_seed': seed, 'max_workers': workers})
    samples = read_gait_csv(data)
    if not samples:
        raise InvalidArgumentError(f"dataset {data} has no rows")

    h = train_hierarchy(samples, config.train, params=config.biped, max_workers=config.sweep.max_workers)
    model_file = save_model(h, out)

    click.echo(f"{'controller':<10} {'output':<12} {'rules':>6} {'train_rmse':>14}")
    for entry in model_file.controllers:
        rmse = math.sqrt(entry.train_se / len(samples))
        click.echo(f"{entry.id:<10} {entry.output_name:<12} {entry.fis.n_rules:>6} {rmse:>14.6g}")
    click.echo(f"✅ {len(model_file.controllers)} models saved to {out}")


@cli.command('eval')
@click.option('--model', '-m', required=True, type=click.Path(), help='Model file')
@click.option('--data', '-d', required=True, type=click.Path(), help='Dataset CSV')
@click.option('--out', '-o', type=click.Path(), help='Optional error table CSV')
@click.pass_context
@handle_errors
def eval_cmd(ctx: click.Context, model: str, data: str, out: Optional[str]) -> None:
    """Evaluate every model on a dataset."""
    model_file = load_model_file(model)
    h = from_model_file(model_file)
    samples = read_gait_csv(data)
    if not samples:
        raise InvalidArgumentError(f"dataset {data} has no rows")

    stored_se = {(c.id, c.output_index): c.train_se for c in model_file.controllers}
    entries: Dict[Tuple[str, int, int], SweepEntry] = {}
    for node_id, index, fis in h.models():
        result = evaluate(fis, project_dataset(samples, h.node(node_id).spec, index))
        entries[(node_id, index, len(samples))] = SweepEntry(
            result.cumulative_se, result.rmse, stored_se[(node_id, index)]
        )

    click.echo(f"{'controller':<10} {'output':>6} {'cumulative_se':>16} {'rmse':>14}")
    for (node_id, index, _), entry in sorted(entries.items()):
        click.echo(f"{node_id:<10} {index:>6} {entry.cumulative_se:>16.9g} {entry.rmse:>14.6g}")
    if out:
        write_text(out, format_error_table(entries))
        click.echo(f"Error table saved to {out}")


@cli.command()
@click.option('--out', '-o', required=True, type=click.Path(), help='Output directory')
@click.option('--sizes', help='Comma-separated training sizes')
@click.option('--workers', type=int, help='Parallel training workers')
@click.option('--format', '-f', 'output_format', default='markdown',
              type=click.Choice(['markdown', 'html']),
              help='Study report format')
@click.pass_context
@handle_errors
def sweep(
    ctx: click.Context,
    out: str,
    sizes: Optional[str],
    workers: Optional[int],
    output_format: str,
) -> None:
    """Run the training-set-size study."""
    config = _config(ctx, {'sizes': sizes, 'max_workers': workers})
    result = run_sweep(config.sweep)

    write_text(os.path.join(out, "errors.csv"), export_error_table(result))
    for size, h in sorted(result.hierarchies.items()):
        save_model(h, os.path.join(out, f"model_{size}.json"), data_seed=config.sweep.train_seeds()[size])

    rules = rule_count_report(next(iter(result.hierarchies.values())))
    report_name = "report.html" if output_format == 'html' else "report.md"
    write_text(os.path.join(out, report_name), render_study_report(result, rules, output_format))

    click.echo(f"{len(result.entries)} entries written to {os.path.join(out, 'errors.csv')}")
    for (controller, output), size in best_sizes(result).items():
        click.echo(f"  {controller} output {output}: best size {size}")


def _resolve_axis(names: Sequence[str], token: str) -> int:
    token = token.strip()
    if token.isdigit():
        index = int(token)
        if index >= len(names):
            raise InvalidArgumentError(f"axis {index} out of range for inputs {list(names)}")
        return index
    if token not in names:
        raise InvalidArgumentError(f"unknown input {token!r}; inputs are {list(names)}")
    return list(names).index(token)


@cli.command()
@click.option('--model', '-m', required=True, type=click.Path(), help='Model file')
@click.option('--controller', required=True, help='Controller id, e.g. HFLC1')
@click.option('--output-index', default=0, type=int, help='Output index of the controller')
@click.option('--axes', required=True, help='Two inputs i,j by name or index')
@click.option('--fixed', multiple=True, help='Held input as name=value (repeatable)')
@click.option('--resolution', default=41, type=int, help='Grid points per axis')
@click.option('--out', '-o', required=True, type=click.Path(), help='Output CSV path')
@click.pass_context
@handle_errors
def surface(
    ctx: click.Context,
    model: str,
    controller: str,
    output_index: int,
    axes: str,
    fixed: Tuple[str, ...],
    resolution: int,
    out: str,
) -> None:
    """Export a controller response surface."""
    h = load_model(model)
    node = h.node(controller)
    if not 0 <= output_index < len(node.models):
        raise InvalidArgumentError(f"{controller} has {len(node.models)} outputs, got {output_index}")
    fis = node.models[output_index]
    names = fis.input_names

    parts = axes.split(',')
    if len(parts) != 2:
        raise InvalidArgumentError(f"--axes needs two inputs, got {axes!r}")
    axis_i, axis_j = (_resolve_axis(names, part) for part in parts)

    held: Dict[int, float] = {}
    for item in fixed:
        key, sep, value = item.partition('=')
        if not sep:
            raise InvalidArgumentError(f"--fixed expects name=value, got {item!r}")
        try:
            held[_resolve_axis(names, key)] = float(value)
        except ValueError as e:
            raise InvalidArgumentError(f"--fixed {item!r}: {e}") from e

    write_text(out, export_surface(fis, axis_i, axis_j, held, resolution))
    click.echo(f"{resolution ** 2} rows written to {out}")


@cli.command()
@click.option('--model', '-m', required=True, type=click.Path(), help='Model file')
@click.option('--steps', type=int, help='Number of walk phases')
@click.option('--out', '-o', required=True, type=click.Path(), help='Walk log CSV path')
@click.pass_context
@handle_errors
def walk(ctx: click.Context, model: str, steps: Optional[int], out: str) -> None:
    """Run a closed-loop walk and report COM tracking."""
    config = _config(ctx, {'walk_steps': steps})
    h = load_model(model)
    log = closed_loop_walk(h, config.gait, config.walk.steps, config.walk.max_iter, config.walk.tol)
    write_walk_log(log, out)

    summary = summarize_walk(log)
    click.echo(f"Phases:            {len(log)}")
    click.echo(f"Mean COM error:    {summary.mean_com_error:.6g} m")
    click.echo(f"Max COM error:     {summary.max_com_error:.6g} m")
    click.echo(f"Convergence rate:  {summary.convergence_rate:.1%}")
    click.echo(f"Mean iterations:   {summary.mean_iterations:.3g}")


def main() -> None:
    """Main entry point."""
    try:
        cli()
    except KeyboardInterrupt:
        click.echo("\nOperation cancelled by user.", err=True)
        sys.exit(1)
    except Exception as e:
        click.echo(f"❌ Unexpected error: {e}", err=True)
        sys.exit(1)


if __name__ == '__main__':
    main()
