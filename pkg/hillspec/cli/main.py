import argparse
import hashlib
import json
import logging
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from hillspec import __version__
from hillspec.database.setup import get_session
from hillspec.errors import ConfigError, DomainError, NumericalError
from hillspec.models.models import RunRecord
from hillspec.schemas.schemas import ExperimentConfig, FileEntry, RunManifest, RunRecordResponse, Suite
from hillspec.services.files import sha256_file
from hillspec.services.ledger import LedgerService
from hillspec.services.suites import SUITES, SuiteContext, build_potential

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

SCALAR_KEYS = {"suite", "m", "K", "count", "M", "n0", "n_max", "split_eps", "delta", "trials",
               "neumann_order", "out"}
LIST_KEYS = {"K_list", "s_grid", "n_values", "lambda_shift"}
TOLERANCE_KEYS = {"residual_tol": "residual", "tie_tol": "tie", "quad_tol": "quadrature"}


def _complex(text: str) -> complex:
    text = text.replace(" ", "")
    if "i" in text and "j" not in text:
        text = text.replace("i", "j")
    try:
        return complex(text)
    except ValueError:
        raise ConfigError(f"Not a complex number: {text!r}")


def _split(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _index_map(text: str) -> Dict[int, complex]:
    """`1:15, 2:3+1i` -> {1: 15, 2: 3+1j}"""
    mapping: Dict[int, complex] = {}
    for item in _split(text):
        k, sep, value = item.partition(":")
        if not sep:
            raise ConfigError(f"Expected index:value, got {item!r}")
        try:
            mapping[int(k)] = _complex(value)
        except ValueError:
            raise ConfigError(f"Bad index in {item!r}")
    return mapping


def parse_config_text(text: str) -> Dict[str, Any]:
    """Flat `key = value` lines (with `#` comments) into ExperimentConfig fields"""
    raw: Dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {line_no}: expected `key = value`, got {line!r}")
        if key in raw:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}")
        raw[key] = value

    fields: Dict[str, Any] = {}
    potential: Dict[str, Any] = {"params": {}}
    tolerances: Dict[str, Any] = {}
    for key, value in raw.items():
        if key in SCALAR_KEYS:
            fields[key] = value
        elif key in LIST_KEYS:
            fields[key] = _split(value)
        elif key == "potential":
            potential["kind"] = value
        elif key == "potential_path":
            potential["path"] = value
        elif key == "seed":
            potential["seed"] = value
        elif key in ("c", "amplitude"):
            potential["params"][key] = _complex(value)
        elif key in ("cos", "sin"):
            potential["params"][key] = _index_map(value)
        elif key == "real_valued":
            potential["params"][key] = value.lower() in ("1", "true", "yes")
        elif key in ("center", "eta", "norm"):
            potential["params"][key] = float(value)
        elif key == "window":
            potential["params"][key] = int(value)
        elif key == "contour":
            parts = _split(value)
            if len(parts) not in (3, 4):
                raise ConfigError(f"contour takes re,im,radius[,nodes], got {value!r}")
            fields["contour"] = dict(zip(("re", "im", "radius", "nodes"), parts))
        elif key in TOLERANCE_KEYS:
            tolerances[TOLERANCE_KEYS[key]] = value
        else:
            raise ConfigError(f"Unknown configuration key {key!r}")
    fields["potential"] = potential
    if tolerances:
        fields["tolerances"] = tolerances
    return fields


def load_config(path: Optional[str], suite: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Parse the config file (if any), apply CLI overrides and validate"""
    fields: Dict[str, Any] = {"potential": {"params": {}}}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"Cannot read config {path}: {e}")
        try:
            fields = parse_config_text(text)
        except ValueError as e:
            raise ConfigError(f"{path}: {e}")
    fields["suite"] = suite
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "seed":
            fields["potential"]["seed"] = value
        else:
            fields[key] = value
    try:
        return ExperimentConfig.model_validate(fields)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}")


def _jsonable(value: Any):
    # potential parameters may hold complex coefficients
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def config_digest(config: ExperimentConfig) -> str:
    payload = json.dumps(config.model_dump(exclude={"out"}), sort_keys=True, default=_jsonable)
    return hashlib.sha256(payload.encode()).hexdigest()


def _inventory(out_dir: Path, paths: Sequence[Path]) -> List[FileEntry]:
    entries = []
    for path in sorted(set(paths)):
        entries.append(FileEntry(path=str(path.relative_to(out_dir)), sha256=sha256_file(path),
                                 size=path.stat().st_size))
    return entries


def _changed_outputs(earlier: RunRecord, manifest: RunManifest) -> List[str]:
    """Files present in both runs whose SHA-256 differ"""
    before = {f.path: f.sha256 for f in earlier.files}
    return sorted(f.path for f in manifest.files if f.path in before and before[f.path] != f.sha256)


def run(config: ExperimentConfig) -> RunManifest:
    """Run the selected suite, write the manifest and record the run in the ledger"""
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = datetime.utcnow()
    t0 = time.perf_counter()
    ctx = SuiteContext(config=config, out_dir=out_dir)
    exit_code = EXIT_OK

    logger.info(f"Running suite {config.suite.value} (m={config.m}) into {out_dir}")
    try:
        with ctx.stage("potential"):
            ctx.potential = build_potential(config)
        SUITES[config.suite](ctx)
        if not all(a.passed for a in ctx.assertions):
            exit_code = EXIT_ASSERTION
    except NumericalError as e:
        logger.error(f"Numerical failure in stage {ctx.failed_stage}: {e}")
        exit_code = EXIT_NUMERICAL
    except (ConfigError, DomainError) as e:
        logger.error(f"Invalid input in stage {ctx.failed_stage}: {e}")
        exit_code = EXIT_CONFIG

    manifest = RunManifest(
        config_digest=config_digest(config),
        version=__version__,
        suite=config.suite,
        started_at=started,
        stages=ctx.stages,
        assertions=ctx.assertions,
        files=_inventory(out_dir, ctx.files),
        exit_code=exit_code,
        failed_stage=ctx.failed_stage if exit_code in (EXIT_CONFIG, EXIT_NUMERICAL) else None,
    )
    (out_dir / "manifest.json").write_text(manifest.model_dump_json(indent=2) + "\n")

    with get_session(out_dir) as session:
        service = LedgerService(session)
        earlier = service.runs_with_digest(manifest.config_digest)
        record = service.record_run(manifest)
        if earlier:
            changed = _changed_outputs(earlier[-1], manifest)
            if changed:
                logger.warning(f"Outputs {changed} differ from run {earlier[-1].id} of the same configuration")
            else:
                logger.info(f"Run {record.id} reproduces run {earlier[-1].id} of the same configuration")
    logger.info(f"Suite {config.suite.value} finished with exit code {exit_code} "
                f"in {time.perf_counter() - t0:.2f}s ({len(manifest.files)} files)")
    return manifest


def history(out_dir: str, clear: bool = False, limit: int = 50) -> List[RunRecordResponse]:
    """Recorded runs of an output directory, newest first; clear empties the ledger"""
    with get_session(out_dir) as session:
        service = LedgerService(session)
        if clear:
            removed = service.clear()
            logger.info(f"Cleared {removed} runs from the ledger in {out_dir}")
            return []
        return [RunRecordResponse.model_validate(record) for record in service.get_runs(limit=limit)]


def configure_logging(quiet: bool = False):
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
    logging.getLogger().setLevel(logging.WARNING if quiet else logging.INFO)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hillspec",
                                     description="Spectral verification of Hill-type operators D_m + B(v).")
    parser.add_argument("command", choices=[s.value for s in Suite] + ["history"],
                        help="Suite to run, or `history` to list recorded runs.")
    parser.add_argument("--config", help="Flat key = value experiment file.")
    parser.add_argument("--out", help="Output directory (overrides the config).")
    parser.add_argument("--seed", type=int, help="Potential seed (overrides the config).")
    parser.add_argument("--k", type=int, dest="K", help="Truncation radius K (overrides the config).")
    parser.add_argument("--quiet", action="store_true", help="Only log warnings and errors.")
    parser.add_argument("--clear", action="store_true", help="With `history`: delete all recorded runs.")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.quiet)

    if args.command == "history":
        records = history(args.out or "out", clear=args.clear)
        for r in records:
            print(f"{r.id}\t{r.started_at:%Y-%m-%d %H:%M:%S}\t{r.suite}\texit={r.exit_code}\t"
                  f"{r.wall_seconds:.2f}s\t{r.config_digest[:12]}\t{len(r.files)} files")
        return EXIT_OK

    try:
        config = load_config(args.config, args.command, {"out": args.out, "seed": args.seed, "K": args.K})
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_CONFIG
    manifest = run(config)
    summary = json.dumps({"suite": manifest.suite.value, "exit_code": manifest.exit_code,
                          "passed": sum(a.passed for a in manifest.assertions),
                          "assertions": len(manifest.assertions)})
    print(summary)
    return manifest.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
