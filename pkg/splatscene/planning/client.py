"""Planner client: recorded fixtures or a chat-completion endpoint."""

import asyncio
import json
import logging
import os
from collections.abc import Callable
from pathlib import Path
from typing import Any, NamedTuple

import httpx

from splatscene.config import PlannerConfig, PlannerMode
from splatscene.errors import (
    InvalidPlanError,
    MissingCredentialError,
    PlannerNetworkError,
    RetryExhaustedError,
    SchemaError,
)
from splatscene.models import Relation, SceneDims
from splatscene.planning.prompts import (
    ANCHORS_TEMPLATE,
    DIALOGUE_PREFIX,
    OBJECTS_TEMPLATE,
    RELATIONS_TEMPLATE,
    PromptTemplate,
    render_prompt,
)
from splatscene.planning.scene_spec import (
    assemble_relations,
    expand_instances,
    parse_anchors,
    parse_object_relations,
    parse_objects,
    parse_relations,
    parse_scene_spec,
)
from splatscene.utils.parsing import extract_json_object

log = logging.getLogger(__name__)

OBJECTS_FILE = "objects.json"
ANCHORS_FILE = "anchors.json"
RELATIONS_FILE = "relations.json"
DIALOGUE_FILE = "dialogue.txt"
SCENE_FILE = "scene.json"

CORRECTION = "The object is invalid. Return ONLY a corrected JSON object."


class PlanDocuments(NamedTuple):
    objects: str
    anchors: str
    relations: str


def compose_constraint(user_constraint: str, dialogue: str | None = None) -> str:
    """Fold a recorded dialogue into the user constraint."""
    if not dialogue or not dialogue.strip():
        return user_constraint
    constraint = f"{DIALOGUE_PREFIX}: {dialogue.strip()}"
    return f"{constraint} {user_constraint}".rstrip() if user_constraint else constraint


def read_fixture(path: Path) -> PlanDocuments:
    path = Path(path)
    try:
        return PlanDocuments(
            objects=(path / OBJECTS_FILE).read_text(encoding="utf-8"),
            anchors=(path / ANCHORS_FILE).read_text(encoding="utf-8"),
            relations=(path / RELATIONS_FILE).read_text(encoding="utf-8"),
        )
    except FileNotFoundError as e:
        raise SchemaError(f"fixture {path}: missing {Path(e.filename).name}") from e


def read_dialogue(path: Path) -> str | None:
    f = Path(path) / DIALOGUE_FILE
    return f.read_text(encoding="utf-8") if f.exists() else None


def _headers(config: PlannerConfig) -> dict[str, str]:
    key = os.environ.get(config.api_key_env)
    if not key:
        raise MissingCredentialError(
            f"environment variable {config.api_key_env} is not set"
        )
    value = f"{config.auth_scheme} {key}" if config.auth_scheme else key
    return {config.auth_header: value, "Content-Type": "application/json"}


def _reply_text(payload: Any) -> str:
    try:
        choice = payload["choices"][0]
    except (KeyError, IndexError, TypeError):
        raise InvalidPlanError("reply has no choices") from None
    message = choice.get("message") if isinstance(choice, dict) else None
    if isinstance(message, dict) and isinstance(message.get("content"), str):
        return message["content"]
    if isinstance(choice, dict) and isinstance(choice.get("text"), str):
        return choice["text"]
    raise InvalidPlanError("first choice carries no text")


class _Session:
    """One planning conversation against the configured endpoint."""

    def __init__(self, client: httpx.AsyncClient, config: PlannerConfig, headers: dict[str, str]):
        self.client = client
        self.config = config
        self.headers = headers

    async def _complete(self, messages: list[dict[str, str]]) -> str:
        body: dict[str, Any] = {"messages": messages}
        if self.config.model:
            body["model"] = self.config.model
        if self.config.temperature is not None:
            body["temperature"] = self.config.temperature
        try:
            resp = await self.client.post(self.config.endpoint_url, json=body, headers=self.headers)
            resp.raise_for_status()
            payload = resp.json()
        except httpx.HTTPError as e:
            raise PlannerNetworkError(f"planner request failed: {e}") from e
        except ValueError as e:
            raise InvalidPlanError(f"reply is not JSON: {e}") from e
        return _reply_text(payload)

    async def ask(
        self,
        document: str,
        template: PromptTemplate,
        user_constraint: str,
        input: str,
        validate: Callable[[str], Any],
    ) -> str:
        messages = [
            {"role": "system", "content": render_prompt(template, user_constraint, input)},
            {"role": "user", "content": input},
        ]
        retries = self.config.max_retries
        last_error = ""
        for i in range(retries + 1):
            raw = await self._complete(messages)
            try:
                text = extract_json_object(raw)
                validate(text)
                return text
            except (ValueError, SchemaError) as e:
                last_error = str(e)
                if i < retries:
                    log.warning(
                        "%s reply invalid (attempt %d/%d): %s", document, i + 1, retries + 1, e
                    )
                    messages.append({"role": "assistant", "content": raw[:4000]})
                    messages.append({"role": "user", "content": CORRECTION})
                    await asyncio.sleep(self.config.retry_backoff * (i + 1))
        raise RetryExhaustedError(document, retries + 1, last_error)


async def plan_scene(
    scene_text: str,
    user_constraint: str,
    config: PlannerConfig,
    scene: SceneDims | None = None,
    dialogue: str | None = None,
) -> PlanDocuments:
    """Produce the objects, anchors and relations documents.

    Fixture mode returns the recorded files unchanged after validating them.
    Live mode asks for the objects, then the anchors of every instance, then
    the relations of each instance in turn (one request per current object).
    Later inputs list the instance ids derived from the objects reply; the
    per-object relation maps are assembled into one nested document.
    """
    scene = scene or SceneDims.indoor(5.0, 5.0, 3.0)

    if config.mode is PlannerMode.FIXTURE:
        if config.fixture_path is None:
            raise SchemaError("fixture planner mode requires fixture_path")
        docs = read_fixture(config.fixture_path)
        parse_scene_spec(docs.objects, docs.anchors, docs.relations, scene)
        log.info("Loaded planning fixture from %s", config.fixture_path)
        return docs

    constraint = compose_constraint(user_constraint, dialogue)
    headers = _headers(config)
    scene_type = f"{scene.kind.value} scene"

    async with httpx.AsyncClient(follow_redirects=True, timeout=config.timeout) as client:
        session = _Session(client, config, headers)

        objects = await session.ask(
            "objects", OBJECTS_TEMPLATE, constraint, scene_text, parse_objects
        )
        nodes = expand_instances(parse_objects(objects))
        listing = json.dumps(
            {"scene_type": scene_type, "scene_text": scene_text, "objects_list": nodes}
        )

        anchors = await session.ask(
            "anchors",
            ANCHORS_TEMPLATE,
            constraint,
            listing,
            lambda text: parse_anchors(text, nodes, scene),
        )
        per_object: dict[str, list[tuple[str, Relation]]] = {}
        for node in nodes:
            request = json.dumps(
                {
                    "scene_type": scene_type,
                    "scene_text": scene_text,
                    "current_object": node,
                    "objects_list": [n for n in nodes if n != node],
                }
            )

            def check(text: str, node: str = node) -> None:
                targets = parse_object_relations(text, node, nodes)
                parse_relations(assemble_relations({**per_object, node: targets}), nodes)

            text = await session.ask(
                f"relations for {node}", RELATIONS_TEMPLATE, constraint, request, check
            )
            per_object[node] = parse_object_relations(text, node, nodes)
        relations = assemble_relations(per_object)

    log.info("Planned %d instances for %r", len(nodes), scene_text)
    return PlanDocuments(objects=objects, anchors=anchors, relations=relations)
