"""Command-line entry points: run experiments, recompute metrics, list
courses, and serve the live gateway."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .course import builtin_course_names, load_course
from .session import ExperimentConfig, compute_metrics, read_jsonl, run_experiment


@click.group()
def main():
    """Buzz-wire shared-control simulator."""


@main.command()
@click.argument("config_path", type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_dir", type=click.Path(path_type=Path),
              default=Path("runs"), show_default=True,
              help="Directory for JSONL logs and the summary table.")
def run(config_path: Path, out_dir: Path):
    """Run a headless experiment from a YAML config file."""
    config = ExperimentConfig.from_yaml(config_path.read_text())
    summary = run_experiment(config, out_dir)
    for row in summary:
        click.echo(json.dumps(row, sort_keys=True))


@main.command()
@click.argument("log_paths", nargs=-1, required=True,
                type=click.Path(exists=True, path_type=Path))
def metrics(log_paths):
    """Recompute per-trial metrics from JSONL trial logs."""
    for path in log_paths:
        log = read_jsonl(path)
        m = compute_metrics(log)
        click.echo(json.dumps({
            "log": str(path),
            "outcome": m.outcome.value,
            "collisions": m.collisions,
            "mean_squared_jerk": m.mean_squared_jerk,
            "time_to_success": m.time_to_success,
        }, sort_keys=True))


@main.command()
def courses():
    """List the built-in wire courses."""
    for name in builtin_course_names():
        course = load_course(name)
        click.echo(f"{name}: {len(course.centerline)} points, "
                   f"length {course.total_length:.3f} m, "
                   f"wire radius {course.wire_radius*1000:.1f} mm")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--course", "course_id", default="training", show_default=True)
@click.option("--mode", default="sc_user", show_default=True)
def serve(host: str, port: int, course_id: str, mode: str):
    """Start the live WebSocket gateway for the cockpit."""
    import uvicorn

    from .gateway import build_app
    from .session import Mode

    app = build_app(course_id=course_id, mode=Mode(mode))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
