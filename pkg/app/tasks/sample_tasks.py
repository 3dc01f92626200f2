import logging

from ..schemas import SampleConstraints, SampleResult
from ..verification import harness
from .celery_app import celery_app

logger = logging.getLogger(__name__)


@celery_app.task(bind=True)
def certify_sample_task(self, index: int, seed: int, q: int, eps: float, constraints: dict) -> dict:
    """
    Celery task certifying one random schedule.

    Args:
        self: The task instance (allows updating state).
        index: Position of the sample in the experiment, used to order results.
        seed: Seed of the random schedule.
        q: Criticality order.
        eps: Accuracy.
        constraints: SampleConstraints as a JSON dict.

    Returns:
        A SampleResult dict. Failures are reported in it, never raised.
    """
    logger.info(f"Certifying sample {index} (seed={seed}, q={q}, eps={eps})")
    if not self.request.is_eager:
        self.update_state(state="PROGRESS", meta={"status": f"Certifying sample {index}..."})
    try:
        parsed = SampleConstraints.model_validate(constraints)
    except Exception as e:
        logger.error(f"Sample {index} has invalid constraints: {e}")
        return SampleResult(index=index, seed=seed, passed=False, error=str(e)).model_dump(mode="json")
    return harness.certify_sample_or_error(index, seed, q, eps, parsed).model_dump(mode="json")
