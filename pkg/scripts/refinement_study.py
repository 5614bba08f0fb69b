"""
Quantisation-refinement study for the spanning-set rate.

Recomputes the spanning counts and the periodic upper bound with finer and
finer control alphabets, so the drift of the quantised estimate can be read
off a single table.

Usage:
    python scripts/refinement_study.py fixtures/systems/scalar_a1.cfg --region Q --k-region K \
        --levels 3 5 9 --taus 1 2 3 4 5 --out out/refinement.csv
"""

import argparse
import csv
import logging
import sys
from pathlib import Path

# Add the project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from config.settings import settings
from src.entropy_estimators import k_grid, spanning_count, spanning_table, upper_bound_search
from src.shared.errors import ToolkitError
from src.shared.schemas.estimators import SearchConfig, SpanningConfig
from src.system_model import load_system

logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
    format='%(asctime)s - %(levelname)s - %(message)s',
)
logger = logging.getLogger(__name__)


def refinement_study(args: argparse.Namespace) -> list:
    spec = load_system(args.system)
    q_region = spec.region(args.region)
    points = k_grid(spec, q_region, args.k_region, args.points)
    rows = []
    for levels in args.levels:
        config = SpanningConfig(levels=levels, switch_step=args.switch_step, workers=args.workers)
        results = [spanning_count(spec, points, q_region, tau, config=config) for tau in args.taus]
        table = spanning_table(results)
        search = upper_bound_search(spec, q_region, SearchConfig(levels=levels, horizon=args.horizon,
                                                                 seed=args.seed, workers=args.workers))
        logger.info(f"levels={levels}: counts {[r.count for r in table.rows]}, slope {table.slope}, "
                    f"upper bound {search.value:.6g}")
        rows.append({
            "levels": levels,
            "alphabet": levels ** spec.inputs,
            "counts": " ".join(str(r.count) for r in table.rows),
            "slope": table.slope,
            "upper_bound": search.value,
        })
    return rows


def main() -> int:
    parser = argparse.ArgumentParser(description="Refine the control quantisation of the spanning estimate")
    parser.add_argument("system", help="System file")
    parser.add_argument("--region", default="Q")
    parser.add_argument("--k-region", default=None)
    parser.add_argument("--points", type=int, default=101, help="K-grid points per axis")
    parser.add_argument("--levels", type=int, nargs="+", default=[3, 5, 9])
    parser.add_argument("--taus", type=float, nargs="+", default=[1.0, 2.0, 3.0, 4.0, 5.0])
    parser.add_argument("--switch-step", type=float, default=0.5)
    parser.add_argument("--horizon", type=float, default=settings.ENTROPY_HORIZON)
    parser.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    parser.add_argument("--workers", type=int, default=settings.DEFAULT_WORKERS)
    parser.add_argument("--out", default=str(Path(settings.OUTPUT_DIR) / "refinement.csv"))
    args = parser.parse_args()

    try:
        rows = refinement_study(args)
    except ToolkitError as e:
        logger.error(f"Refinement study failed: {e}")
        return 1 if isinstance(e, ValueError) else 2

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=["levels", "alphabet", "counts", "slope", "upper_bound"])
        writer.writeheader()
        writer.writerows(rows)
    logger.info(f"Wrote {len(rows)} rows to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
