import logging

from ..classes import ResultRow, TrialState

logger = logging.getLogger(__name__)


class Collector:
    """Turns the trial's run reports into result rows, one per configured algorithm."""

    def collect(self, state: TrialState) -> list[ResultRow]:
        cfg = state["config"]
        reports = state.get("reports", {})
        failures = state.get("failures", {})
        quantized = state.get("quantized", {})
        bound = state["bound"]
        sweep_param = state.get("sweep_param", "none")
        sweep_value = state.get("sweep_value", "-")
        unquantized_sweep = sweep_param == "quant_bits" and cfg.optimizer.quant_bits is None

        rows = []
        for name in dict.fromkeys(cfg.algorithms):
            if name not in reports:
                rows.append(
                    ResultRow(
                        sweep_param=sweep_param, sweep_value=sweep_value, trial=state["trial"],
                        algorithm=name, rate_bps_hz=float("nan"), rate_quantized_bps_hz=None,
                        iterations=None, lipschitz_L=bound.L, alpha=float("nan"), wall_ms=None,
                        status=f"error:{failures.get(name, 'Missing')}",
                    )
                )
                continue
            report = reports[name]
            rate = report.final_rate
            rows.append(
                ResultRow(
                    sweep_param=sweep_param,
                    sweep_value=sweep_value,
                    trial=state["trial"],
                    algorithm=name,
                    rate_bps_hz=rate,
                    rate_quantized_bps_hz=rate if unquantized_sweep else quantized.get(name),
                    iterations=report.iterations,
                    lipschitz_L=bound.L,
                    alpha=report.alpha,
                    wall_ms=report.wall_ms if state.get("timing") else None,
                    status=report.status,
                )
            )
        return rows

    async def run(self, state: TrialState) -> dict:
        rows = self.collect(state)
        if (progress := state.get("progress")) and (job_id := state.get("job_id")):
            failed = [row.algorithm for row in rows if not row.ok]
            await progress.send_status_update(
                job_id=job_id,
                status="trial_error" if failed else "trial_complete",
                message=f"Trial {state['trial']} at {state.get('sweep_param', 'none')}={state.get('sweep_value', '-')}",
                error=f"failed: {', '.join(failed)}" if failed else None,
                result={"trial": state["trial"], "rows": len(rows)},
            )
        return {"rows": rows}
