"""
Prompt contracts rendered with Jinja2.

Field text for every template lives in contracts.yaml; contract.j2 joins the
seven fields into one continuous instruction. Use render_prompt() for the
system architecture prompt and render_node_prompt() for node descriptions.
"""

import json
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import yaml
from jinja2 import Environment, FileSystemLoader

from app.errors import UnknownTemplateError
from app.models import AtomicRosNodeClassifier, LaunchDependencyDescription, NodeInventory, PromptContract
from app.services.launch_analyzer import dump_ldd
from app.services.node_extractor import dump_inventory

_PROMPTS_DIR = Path(__file__).parent
_CONTRACTS_FILE = _PROMPTS_DIR / "contracts.yaml"
_LAYOUT = "contract.j2"

SYSTEM_ARCHITECTURE_CONSTRUCTOR = "system_architecture_constructor"
NODE_DESCRIPTION = "node_description"

_env = Environment(
    loader=FileSystemLoader(_PROMPTS_DIR),
    autoescape=False,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


@lru_cache(maxsize=1)
def _contracts() -> Dict[str, Dict[str, str]]:
    with _CONTRACTS_FILE.open(encoding="utf-8") as handle:
        return yaml.safe_load(handle) or {}


def available_templates() -> List[str]:
    return sorted(_contracts())


def _embed(artifacts: Sequence[Tuple[str, str]]) -> str:
    blocks = []
    for title, document in artifacts:
        json.loads(document)  # must stay valid JSON
        blocks.append(f"### {title}\n```json\n{document.rstrip()}\n```")
    return "\n\n".join(blocks)


def build_contract(template_name: str, artifacts: Sequence[Tuple[str, str]]) -> PromptContract:
    """Fill the named contract with ``(title, json_text)`` artifacts as its input field."""
    fields = _contracts().get(template_name)
    if fields is None:
        raise UnknownTemplateError(template_name, available_templates())
    contract = PromptContract(input=_embed(artifacts), **fields)
    empty = [name for name, value in contract.model_dump().items() if not value.strip()]
    if empty:
        raise ValueError(f"Prompt contract '{template_name}' has empty fields: {', '.join(empty)}")
    return contract


def render(contract: PromptContract, annotations: Sequence[str] = ()) -> str:
    return _env.get_template(_LAYOUT).render(contract=contract, annotations=list(annotations))


def render_prompt(
    template_name: str, inventory: NodeInventory, ldd: LaunchDependencyDescription
) -> str:
    """
    Render ``template_name`` with the node inventory and the launch dependency
    description embedded verbatim, exactly as they are written to disk.
    """
    contract = build_contract(
        template_name,
        [
            ("List of atomic ROS nodes", dump_inventory(inventory)),
            ("Launch file dependency description", dump_ldd(ldd)),
        ],
    )
    annotations = []
    if not any(True for _ in inventory.classifiers()):
        annotations.append("the node list is empty; no node classes were found in the repository.")
    return render(contract, annotations)


def render_node_prompt(classifier: AtomicRosNodeClassifier) -> str:
    document = json.dumps(classifier.model_dump(mode="json", exclude={"description"}), indent=2, ensure_ascii=False)
    return render(build_contract(NODE_DESCRIPTION, [("Atomic ROS node classifier", document)]))
