"""
Command executors: one class per batch command, each turning its run-file
section into module calls and writing the module's export files.
"""

import csv
import logging
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from ..cocycle_lab import alpha, det_cocycle, floquet_exponents, gramian_rank, positive_exponent_sum
from ..entropy_estimators import formula_report, k_grid, spanning_count, spanning_table, write_spanning_csv
from ..expr_core import parse
from ..flow_engine import closed_segment, closure_defect, integrate, integrate_backward, period_length, periodic_orbit
from ..hyperbolic_splitting import continuity_diagnostic, estimate_splitting, verify_hyperbolicity
from ..reachability_graph import build_graph, chain_control_sets, no_return_violations
from ..shared.errors import ConfigError
from ..shared.exports import write_json
from ..shared.keyvalue import optional_path
from ..shared.schemas.estimators import EntropyConfig, SearchConfig, SpanningConfig
from ..shared.schemas.reports import FloquetExponent, FloquetReport, GramianReport, SpectrumReport
from ..shared.schemas.runs import ControlSection, MorseSection, ShadowSection
from ..shift_shadowing import (
    ConstantCocycle,
    CoordinateCocycle,
    FunctionCocycle,
    morse_spectrum,
    read_chain_csv,
    shadow,
    shadow_bound,
    shadow_deviations,
    shadow_experiment,
    write_shadow_csv,
)
from ..system_model import ControlSignal, quantize_controls
from ..volume_probe import volume_lemma_check, write_volume_csv
from .config_loader import PreparedRun

logger = logging.getLogger(__name__)


class BaseCommandExecutor:
    """Base class for command executors."""

    def __init__(self, run: PreparedRun):
        self.run = run
        self.spec = run.spec
        self.out_dir = run.out_dir
        self.artifacts: List[str] = []

    @property
    def section(self):
        return getattr(self.run.config, self.run.command)

    def path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        self.artifacts.append(name)
        return path

    def control(self, section: ControlSection) -> ControlSignal:
        if section.control is None:
            centre = (self.spec.u_lo + self.spec.u_hi) / 2.0
            return ControlSignal.constant(centre, self.spec.delta, bounds=self.spec.control_bounds)
        values = np.array(section.control, dtype=float)
        if values.ndim != 2 or values.shape[1] != self.spec.inputs:
            raise ConfigError(f"control blocks must have {self.spec.inputs} components")
        return ControlSignal.from_array(values, self.spec.delta, periodic=section.periodic,
                                        bounds=self.spec.control_bounds)

    def state(self, values: List[float], key: str = "x0") -> np.ndarray:
        if len(values) != self.spec.dim:
            raise ConfigError(f"{self.run.command}.{key} needs {self.spec.dim} components, got {len(values)}")
        return np.array(values, dtype=float)

    def execute(self) -> Dict[str, Any]:
        raise NotImplementedError


class IntegrateExecutor(BaseCommandExecutor):
    def execute(self) -> Dict[str, Any]:
        section = self.section
        u = self.control(section)
        x0 = self.state(section.x0)
        run = integrate_backward if section.backward else integrate
        segment = run(self.spec, x0, u, section.tau)
        segment.to_csv(self.path("trajectory.csv"))
        return {"steps": segment.n_steps, "final_state": segment.final_state.tolist(),
                "initial_state": segment.states[0].tolist()}


class CocycleExecutor(BaseCommandExecutor):
    def execute(self) -> Dict[str, Any]:
        section = self.section
        u = self.control(section)
        x0 = self.state(section.x0)
        segment = integrate(self.spec, x0, u, section.tau)
        summary: Dict[str, Any] = {"tau": section.tau}
        if section.kind in ("exterior", "both"):
            trace = alpha(self.spec, u, x0, section.tau, segment=segment)
            trace.to_csv(self.path("alpha.csv"))
            summary["alpha"] = trace.final
            summary["alpha_rate"] = trace.rate()
        if section.kind in ("det", "both"):
            trace = det_cocycle(self.spec, u, x0, section.tau, segment=segment)
            trace.to_csv(self.path("det.csv"))
            summary["log_det"] = trace.final
            summary["log_det_rate"] = trace.rate()
        return summary


class FloquetExecutor(BaseCommandExecutor):
    def execute(self) -> Dict[str, Any]:
        section = self.section
        u = self.control(section)
        if not u.is_periodic:
            raise ConfigError("floquet needs a periodic control")
        x0 = self.state(section.x0)
        period = period_length(u)
        iterations = None
        if section.newton:
            orbit = periodic_orbit(self.spec, u, x0)
            x0, iterations = orbit.x0, orbit.iterations
        segment = closed_segment(self.spec, x0, u)
        defect = closure_defect(segment)
        M = segment.fundamental()
        multipliers = np.linalg.eigvals(M)
        order = np.argsort(-np.abs(multipliers), kind="stable")
        exponents = floquet_exponents(M, period)
        report = FloquetReport(
            x0=segment.x0.tolist(),
            period=period,
            defect=defect,
            multipliers=[(float(multipliers[k].real), float(multipliers[k].imag)) for k in order],
            exponents=[FloquetExponent(value=v, multiplicity=m) for v, m in exponents],
            positive_sum=positive_exponent_sum(exponents),
            newton_iterations=iterations,
        )
        write_json(self.path("floquet.json"), report)
        return {"positive_sum": report.positive_sum, "defect": defect}


class GramianExecutor(BaseCommandExecutor):
    def execute(self) -> Dict[str, Any]:
        section = self.section
        result = gramian_rank(self.spec, self.state(section.x0), self.control(section), section.t1, section.t2)
        report = GramianReport(
            t1=section.t1,
            t2=section.t2,
            rank=result.rank,
            regular=result.regular,
            smallest_singular_value=result.smallest_singular_value,
            singular_values=list(map(float, result.singular_values)),
        )
        write_json(self.path("gramian.json"), report)
        return {"rank": result.rank, "regular": result.regular}


class SplittingExecutor(BaseCommandExecutor):
    def execute(self) -> Dict[str, Any]:
        section = self.section
        u = self.control(section)
        x0 = self.state(section.x0)
        region = self.spec.region(section.region) if section.region else None
        splitting = estimate_splitting(self.spec, u, x0, dims=section.dims, tau=section.tau,
                                       horizon=section.horizon, region=region, seed=self.run.seed)
        splitting.to_csv(self.path("splitting.csv"))
        summary: Dict[str, Any] = {
            "dims": list(splitting.dims),
            "horizon": splitting.horizon,
            "convergence": splitting.convergence,
            "method": splitting.method,
        }
        if section.verify:
            report = verify_hyperbolicity(self.spec, splitting, seed=self.run.seed)
            write_json(self.path("hyperbolicity.json"), report)
            summary["hyperbolic"] = report.passed
        if section.continuity:
            summary["continuity"] = continuity_diagnostic(self.spec, u, x0, dims=splitting.dims, seed=self.run.seed)
        return summary


class ChainsetsExecutor(BaseCommandExecutor):
    def execute(self) -> Dict[str, Any]:
        section = self.section
        region = self.spec.region(section.region)
        graph = build_graph(self.spec, region, section.eps, section.tau_step, levels=section.levels,
                            workers=self.run.workers)
        graph.to_edge_csv(self.path("edges.csv"))
        report = graph.to_report(section.region, min_cells=section.min_cells)
        write_json(self.path("chainsets.json"), report)
        summary: Dict[str, Any] = {"sets": len(report.sets), "edges": report.n_edges}
        if section.no_return_samples:
            summary["no_return_violations"] = [
                no_return_violations(self.spec, graph, cells, samples=section.no_return_samples, seed=self.run.seed)
                for cells in chain_control_sets(graph, min_cells=section.min_cells)
            ]
        return summary


def _spanning_config(section, workers: int) -> SpanningConfig:
    values = section.model_dump(include=set(SpanningConfig.model_fields))
    values["workers"] = workers
    return SpanningConfig(**values)


class SpanningExecutor(BaseCommandExecutor):
    def execute(self) -> Dict[str, Any]:
        section = self.section
        q_region = self.spec.region(section.region)
        points = k_grid(self.spec, q_region, section.k_region, section.points_per_axis, section.k_shrink)
        config = _spanning_config(section, self.run.workers)
        results = [spanning_count(self.spec, points, q_region, tau, config=config) for tau in section.taus]
        table = spanning_table(results)
        write_spanning_csv(table, self.path("spanning.csv"))
        write_json(self.path("spanning.json"), table)
        return {"counts": [r.count for r in table.rows], "slope": table.slope}


class EntropyExecutor(BaseCommandExecutor):
    def execute(self) -> Dict[str, Any]:
        section = self.section
        config = self.run.config
        search = config.search.model_dump() if config.search is not None else {}
        search.update(seed=self.run.seed, workers=self.run.workers)
        spanning = (_spanning_config(config.spanning, self.run.workers) if config.spanning is not None
                    else SpanningConfig(workers=self.run.workers))
        entropy = EntropyConfig(
            **section.model_dump(exclude={"region"}),
            spanning=spanning,
            search=SearchConfig(**search),
        )
        report = formula_report(self.spec, self.spec.region(section.region), entropy)
        write_json(self.path("entropy.json"), report)
        if report.spanning is not None:
            write_spanning_csv(report.spanning, self.path("spanning.csv"))
        return {
            "upper_bound": report.upper_bound,
            "lower_bound": report.lower_bound,
            "spanning_slope": report.spanning_slope,
            "sandwich_ok": report.sandwich_ok,
            "lower_consistent": report.lower_consistent,
        }


class ShadowExecutor(BaseCommandExecutor):
    @property
    def section(self) -> ShadowSection:
        return self.run.config.shadow or ShadowSection()

    def execute(self) -> Dict[str, Any]:
        section = self.section
        if section.chain_file is not None:
            path = optional_path(self.run.config_path.parent, section.chain_file)
            delta = section.delta[0]
            chain = read_chain_csv(path, delta, periodic=section.periodic)
            orbit = shadow(chain)
            write_shadow_csv(chain, orbit, self.path("shadow.csv"))
            deviation = float(np.max(shadow_deviations(chain, orbit)))
            bound = shadow_bound(delta, chain.radius)
            return {"delta": delta, "max_deviation": deviation, "bound": bound, "within_bound": deviation <= bound}

        summaries = [
            shadow_experiment(self.spec.u_lo, self.spec.u_hi, delta, chains=section.chains, length=section.length,
                              radius=section.window, periodic=section.periodic, seed=self.run.seed,
                              workers=self.run.workers)
            for delta in section.delta
        ]
        with self.path("shadow.csv").open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["delta", "window", "chains", "length", "max_deviation", "bound", "violations"])
            for s in summaries:
                writer.writerow([repr(s.delta), s.window, s.chains, s.length, repr(s.max_deviation), repr(s.bound),
                                 s.violations])
        write_json(self.path("shadow.json"), {"runs": summaries})
        return {"violations": sum(s.violations for s in summaries)}


class MorseExecutor(BaseCommandExecutor):
    @property
    def section(self) -> MorseSection:
        return self.run.config.morse or MorseSection()

    def cocycle(self, section: MorseSection):
        if section.cocycle == "constant":
            return ConstantCocycle(section.value)
        if section.cocycle == "expression":
            if not section.expression:
                raise ConfigError("morse.expression is required for an expression cocycle")
            return FunctionCocycle.from_expression(parse(section.expression, self.spec.inputs))
        if section.component >= self.spec.inputs:
            raise ConfigError(f"morse.component {section.component} exceeds the control dimension")
        return CoordinateCocycle(component=section.component)

    def execute(self) -> Dict[str, Any]:
        section = self.section
        if self.spec.inputs == 0:
            raise ConfigError("the Morse spectrum over the shift needs a control alphabet (inputs >= 1)")
        alphabet = quantize_controls(self.spec, section.levels)
        config = section.model_copy(update={"seed": self.run.seed})
        report: SpectrumReport = morse_spectrum(self.cocycle(section), alphabet, config)
        with self.path("spectrum.csv").open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["eps", "lower", "upper", "chains"])
            for level in report.levels:
                writer.writerow([repr(level.eps), repr(level.lower), repr(level.upper), level.chains])
        write_json(self.path("spectrum.json"), report)
        return {"lower": report.lower, "upper": report.upper, "periodic_minimum": report.periodic_minimum}


class VolcheckExecutor(BaseCommandExecutor):
    def execute(self) -> Dict[str, Any]:
        section = self.section
        u = self.control(section)
        x0 = self.state(section.x0)
        provider = None
        if section.splitting and not (section.dims is not None and section.dims[1] == 0):
            provider = estimate_splitting(self.spec, u, x0, dims=section.dims, seed=self.run.seed)
        config = section.model_copy(update={"seed": self.run.seed, "workers": self.run.workers})
        report = volume_lemma_check(self.spec, provider, u, x0, section.eps, section.horizons, config)
        write_volume_csv(report, self.path("volume.csv"))
        write_json(self.path("volume.json"), report)
        return {"ratio": report.ratio, "inflated_ratio": report.inflated_ratio, "flagged": report.flagged}


class CommandExecutorFactory:
    """Factory for creating command executors."""

    executors = {
        "integrate": IntegrateExecutor,
        "cocycle": CocycleExecutor,
        "floquet": FloquetExecutor,
        "gramian": GramianExecutor,
        "splitting": SplittingExecutor,
        "chainsets": ChainsetsExecutor,
        "spanning": SpanningExecutor,
        "entropy": EntropyExecutor,
        "shadow": ShadowExecutor,
        "morse": MorseExecutor,
        "volcheck": VolcheckExecutor,
    }

    @classmethod
    def get_executor(cls, run: PreparedRun) -> BaseCommandExecutor:
        executor_class = cls.executors.get(run.command)
        if not executor_class:
            raise ConfigError(f"Unknown command: {run.command}")
        return executor_class(run)
