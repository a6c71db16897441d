import json
from unittest.mock import patch

import httpx
import pytest

from app.errors import ModelValidationError
from app.services.diagnostics import DiagnosticsCollector
from app.services.llm_client import LlmClient, structural_fingerprint

ENDPOINT = "http://llm.test/generate"


def client_for(handler, max_retries=2):
    return LlmClient(
        endpoint=ENDPOINT,
        timeout_ms=1000,
        max_retries=max_retries,
        backoff_seconds=0,
        transport=httpx.MockTransport(handler),
    )


class TestLlmClient:
    def test_generate_text_success(self):
        seen = []

        def handler(request):
            seen.append(json.loads(request.content))
            return httpx.Response(200, json={"completion": "Generated text."})

        result = client_for(handler).generate_text("Describe.", "fallback")
        assert result.text == "Generated text."
        assert not result.used_fallback
        assert result.attempts == 1
        assert seen == [{"prompt": "Describe."}]

    def test_retries_then_succeeds(self):
        calls = []

        def handler(request):
            calls.append(request)
            if len(calls) < 3:
                return httpx.Response(503)
            return httpx.Response(200, json={"completion": "ok"})

        result = client_for(handler).generate_text("p", "fallback")
        assert result.text == "ok"
        assert result.attempts == 3

    def test_fallback_after_retries(self):
        calls = []

        def handler(request):
            calls.append(request)
            return httpx.Response(500)

        diagnostics = DiagnosticsCollector(stage="test")
        result = client_for(handler, max_retries=1).generate_text("p", "fallback", diagnostics=diagnostics)
        assert result.text == "fallback"
        assert result.used_fallback
        assert result.attempts == 2
        assert len(calls) == 2
        assert len(diagnostics.by_code("llm-fallback")) == 1

    def test_timeout_is_retried(self):
        def handler(request):
            raise httpx.ReadTimeout("too slow", request=request)

        result = client_for(handler, max_retries=0).generate_text("p", "fallback")
        assert result.used_fallback
        assert result.error.startswith("ReadTimeout")

    @pytest.mark.parametrize(
        "response",
        [
            httpx.Response(200, json={"text": "wrong key"}),
            httpx.Response(200, json={"completion": "   "}),
            httpx.Response(200, json=["completion"]),
            httpx.Response(200, text="not json"),
        ],
    )
    def test_malformed_response_is_not_retried(self, response):
        calls = []

        def handler(request):
            calls.append(request)
            return response

        result = client_for(handler).generate_text("p", "fallback")
        assert result.used_fallback
        assert result.error.startswith("malformed response")
        assert len(calls) == 1

    def test_disabled_skips_the_endpoint(self):
        def handler(request):
            raise AssertionError("endpoint must not be called")

        result = client_for(handler).generate_text("p", "fallback", enabled=False)
        assert result.text == "fallback"
        assert result.used_fallback
        assert result.attempts == 0

    def test_unconfigured_endpoint(self):
        with patch("app.services.llm_client.settings") as mock_settings:
            mock_settings.llm_endpoint = None
            client = LlmClient()
            assert not client.is_configured()
            assert client.generate_text("p", "fallback").used_fallback

    def test_settings_supply_defaults(self):
        with patch("app.services.llm_client.settings") as mock_settings:
            mock_settings.llm_endpoint = ENDPOINT
            mock_settings.llm_timeout_ms = 2500
            mock_settings.llm_max_retries = 4
            mock_settings.llm_retry_backoff_seconds = 0.25
            client = LlmClient()
            assert client.endpoint == ENDPOINT
            assert client.timeout_seconds == 2.5
            assert client.max_retries == 4
            assert client.backoff_seconds == 0.25


class TestDescribeClassifiers:
    def test_descriptions_are_replaced(self, example_inventory):
        def handler(request):
            return httpx.Response(200, json={"completion": "  Publishes chatter\n and watches the camera. "})

        enriched, fallback_used = client_for(handler).describe_classifiers(example_inventory)
        classifier = next(c for _, c in enriched.classifiers())
        assert classifier.description == "Publishes chatter and watches the camera."
        assert not fallback_used
        assert structural_fingerprint(enriched) == structural_fingerprint(example_inventory)

    def test_failure_keeps_deterministic_description(self, example_inventory, example_classifier):
        def handler(request):
            return httpx.Response(500)

        enriched, fallback_used = client_for(handler, max_retries=0).describe_classifiers(example_inventory)
        assert fallback_used
        assert next(c for _, c in enriched.classifiers()).description == example_classifier.description

    def test_disabled(self, example_inventory):
        def handler(request):
            raise AssertionError("endpoint must not be called")

        enriched, fallback_used = client_for(handler).describe_classifiers(example_inventory, enabled=False)
        assert enriched is example_inventory
        assert fallback_used

    def test_structure_change_is_rejected(self, example_inventory):
        client = client_for(lambda request: httpx.Response(200, json={"completion": "x"}))
        with patch("app.services.llm_client.structural_fingerprint", side_effect=["a", "b"]):
            with pytest.raises(ModelValidationError):
                client.describe_classifiers(example_inventory)
