"""Retry policy for LLM transport calls."""

from typing import Any, Callable, Optional, Tuple, Type

import structlog
from tenacity import (
    AsyncRetrying,
    RetryCallState,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
    wait_random,
)
from tenacity.wait import wait_base

from ..core.exceptions import RateLimitError, TransportError

logger = structlog.get_logger(__name__)


class wait_retry_after(wait_base):
    """Honour a 429 ``Retry-After`` hint, else defer to ``fallback``."""

    def __init__(self, fallback: wait_base, max_wait: float):
        self.fallback = fallback
        self.max_wait = max_wait

    def __call__(self, retry_state: RetryCallState) -> float:
        outcome = retry_state.outcome
        exc = outcome.exception() if outcome is not None else None
        if isinstance(exc, RateLimitError) and exc.retry_after is not None:
            return min(float(exc.retry_after), self.max_wait)
        return self.fallback(retry_state)


def _log_retry(retry_state: RetryCallState) -> None:
    exc = retry_state.outcome.exception() if retry_state.outcome else None
    logger.warning(
        "Retrying LLM request",
        attempt=retry_state.attempt_number,
        error=str(exc),
        error_type=type(exc).__name__,
    )


def retry_policy(
    max_retries: int = 3,
    backoff_factor: float = 1.0,
    max_backoff: float = 30.0,
    jitter: float = 0.0,
    exceptions: Tuple[Type[BaseException], ...] = (TransportError,),
    sleep: Optional[Callable[[float], Any]] = None,
) -> AsyncRetrying:
    """
    Exponential-backoff policy allowing ``1 + max_retries`` attempts.

    Args:
        max_retries: Retries after the first attempt
        backoff_factor: Base backoff time multiplier
        max_backoff: Maximum backoff time in seconds
        jitter: Upper bound of uniform random jitter added to each wait
        exceptions: Exception types that trigger a retry
        sleep: Optional sleep coroutine (tests inject a fake)
    """
    wait: wait_base = wait_exponential(multiplier=backoff_factor, max=max_backoff)
    if jitter > 0:
        wait = wait + wait_random(0, jitter)

    kwargs: dict = {}
    if sleep is not None:
        kwargs["sleep"] = sleep

    return AsyncRetrying(
        stop=stop_after_attempt(max_retries + 1),
        wait=wait_retry_after(wait, max_backoff),
        retry=retry_if_exception_type(exceptions),
        before_sleep=_log_retry,
        reraise=True,
        **kwargs,
    )
