import json
import logging
import time
from typing import Optional, Tuple

import httpx

from app.config import settings
from app.errors import ModelValidationError
from app.models import GenerationResult, NodeInventory, PackageEntry, Violation
from app.prompts import render_node_prompt
from app.services.diagnostics import DiagnosticsCollector

logger = logging.getLogger(__name__)


def structural_fingerprint(inventory: NodeInventory) -> str:
    """Inventory JSON without description fields."""
    document = inventory.model_dump(
        mode="json",
        exclude={"list_packages": {"__all__": {"list_atomic_ros_node_classifiers": {"__all__": {"description"}}}}},
    )
    return json.dumps(document, sort_keys=True)


class LlmClient:
    """
    Client for a text-generation endpoint speaking ``{"prompt"}`` ->
    ``{"completion"}`` JSON over HTTP POST.

    Failures never propagate: after the configured retries the caller's
    fallback text is returned and the result is marked as such.
    """

    def __init__(
        self,
        endpoint: Optional[str] = None,
        timeout_ms: Optional[int] = None,
        max_retries: Optional[int] = None,
        backoff_seconds: Optional[float] = None,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self._endpoint = endpoint
        self._timeout_ms = timeout_ms
        self._max_retries = max_retries
        self._backoff_seconds = backoff_seconds
        self.transport = transport

    @property
    def endpoint(self) -> Optional[str]:
        return self._endpoint or settings.llm_endpoint

    @property
    def timeout_seconds(self) -> float:
        return (self._timeout_ms or settings.llm_timeout_ms) / 1000.0

    @property
    def max_retries(self) -> int:
        return settings.llm_max_retries if self._max_retries is None else self._max_retries

    @property
    def backoff_seconds(self) -> float:
        return settings.llm_retry_backoff_seconds if self._backoff_seconds is None else self._backoff_seconds

    def is_configured(self) -> bool:
        return bool(self.endpoint)

    def _request(self, prompt: str) -> str:
        with httpx.Client(timeout=self.timeout_seconds, transport=self.transport) as client:
            response = client.post(self.endpoint, json={"prompt": prompt})
            response.raise_for_status()
            data = response.json()
        completion = data.get("completion") if isinstance(data, dict) else None
        if not isinstance(completion, str) or not completion.strip():
            raise ValueError("response has no non-empty 'completion' string")
        return completion

    def generate_text(
        self,
        prompt: str,
        fallback: str,
        enabled: bool = True,
        diagnostics: Optional[DiagnosticsCollector] = None,
    ) -> GenerationResult:
        """
        Return the endpoint's completion for ``prompt``, or ``fallback`` when
        disabled, unconfigured, or still failing after the retries.
        """
        if not enabled or not self.is_configured():
            return GenerationResult(text=fallback, used_fallback=True)
        if not prompt.strip():
            return GenerationResult(text=fallback, used_fallback=True, error="empty prompt")

        error = None
        attempts = 0
        for attempt in range(1, self.max_retries + 2):
            attempts = attempt
            try:
                completion = self._request(prompt)
                return GenerationResult(text=completion, attempts=attempt)
            except ValueError as e:
                error = f"malformed response: {e}"
                break
            except httpx.HTTPError as e:
                error = f"{type(e).__name__}: {e}"
                logger.warning(f"LLM request attempt {attempt} failed: {error}")
                if attempt <= self.max_retries and self.backoff_seconds:
                    time.sleep(self.backoff_seconds * attempt)

        if diagnostics is not None:
            diagnostics.warning("llm-fallback", f"fallback text used after {attempts} attempt(s): {error}")
        else:
            logger.error(f"LLM generation failed, using fallback: {error}")
        return GenerationResult(text=fallback, used_fallback=True, attempts=attempts, error=error)

    def describe_classifiers(
        self,
        inventory: NodeInventory,
        enabled: bool = True,
        diagnostics: Optional[DiagnosticsCollector] = None,
    ) -> Tuple[NodeInventory, bool]:
        """
        Replace classifier descriptions with generated text. Returns the new
        inventory and whether any description kept its fallback.
        """
        if not enabled or not self.is_configured():
            return inventory, True

        fallback_used = False
        packages = []
        for package in inventory.list_packages:
            classifiers = []
            for classifier in package.list_atomic_ros_node_classifiers:
                result = self.generate_text(
                    render_node_prompt(classifier), classifier.description, enabled, diagnostics
                )
                fallback_used = fallback_used or result.used_fallback
                description = " ".join(result.text.split())
                classifiers.append(classifier.model_copy(update={"description": description}))
            packages.append(
                PackageEntry(package_name=package.package_name, list_atomic_ros_node_classifiers=classifiers)
            )
        enriched = NodeInventory(list_packages=packages)

        if structural_fingerprint(enriched) != structural_fingerprint(inventory):
            raise ModelValidationError(
                "Generated descriptions",
                [Violation(element="inventory", invariant="description-only", message="structure changed")],
            )
        return enriched, fallback_used


llm_client = LlmClient()
