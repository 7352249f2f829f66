import json
import logging
from dataclasses import dataclass

logger = logging.getLogger(__name__)


@dataclass
class JobCounters:
    total: int = 0
    done: int = 0
    failed: int = 0


class ProgressManager:
    """Per-job trial counters plus structured status lines on the log."""

    def __init__(self, report_every: int = 50):
        self.jobs: dict[str, JobCounters] = {}
        self.report_every = max(1, report_every)

    def start_job(self, job_id: str, total: int) -> None:
        self.jobs[job_id] = JobCounters(total=total)
        logger.info(f"Job {job_id} started with {total} trials")

    def finish_job(self, job_id: str) -> JobCounters:
        counters = self.jobs.pop(job_id, JobCounters())
        logger.info(f"Job {job_id} finished: {counters.done} trials, {counters.failed} failed")
        return counters

    async def send_status_update(
        self, job_id: str, status: str, message: str = None, error: str = None, result: dict = None
    ):
        """Record a status change and emit it as a JSON log line."""
        counters = self.jobs.setdefault(job_id, JobCounters())
        if status == "trial_complete":
            counters.done += 1
        elif status == "trial_error":
            counters.done += 1
            counters.failed += 1

        update = {
            "type": "status_update",
            "job_id": job_id,
            "data": {
                "status": status,
                "message": message,
                "error": error,
                "result": result,
                "done": counters.done,
                "total": counters.total,
            },
        }
        if error:
            logger.warning(json.dumps(update))
        elif status != "trial_complete" or counters.done % self.report_every == 0 or counters.done == counters.total:
            logger.info(json.dumps(update))
        else:
            logger.debug(json.dumps(update))
