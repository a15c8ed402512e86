"""Prompt templates for the three planning requests."""

import re
from enum import Enum

from pydantic import BaseModel, ConfigDict, model_validator

from splatscene.errors import TemplateError

USER_CONSTRAINT = "User Constraint"
INPUT = "input"

DIALOGUE_PREFIX = "Based on the user history dialogue and real-world priors"

_PLACEHOLDER = re.compile(r"\{([A-Za-z][A-Za-z ]*)\}")


class TemplateId(str, Enum):
    OBJECTS = "objects"
    ANCHORS = "anchors"
    RELATIONS = "relations"


class PromptTemplate(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: TemplateId
    body: str
    placeholders: tuple[str, ...] = (USER_CONSTRAINT, INPUT)

    @model_validator(mode="after")
    def _check_placeholders(self) -> "PromptTemplate":
        found = _PLACEHOLDER.findall(self.body)
        for name in self.placeholders:
            n = found.count(name)
            if n != 1:
                raise TemplateError(
                    f"template '{self.id.value}': placeholder {{{name}}} appears {n} times"
                )
        undeclared = sorted(set(found) - set(self.placeholders))
        if undeclared:
            raise TemplateError(
                f"template '{self.id.value}': undeclared placeholder(s) {undeclared}"
            )
        return self


def render_prompt(template: PromptTemplate, user_constraint: str, input: str) -> str:
    """Substitute the placeholders in one pass; substituted text is never re-scanned."""
    values = {USER_CONSTRAINT: user_constraint, INPUT: input}

    def substitute(match: re.Match[str]) -> str:
        name = match.group(1)
        if name not in template.placeholders or name not in values:
            raise TemplateError(f"unresolved placeholder {{{name}}}")
        return values[name]

    return _PLACEHOLDER.sub(substitute, template.body)


OBJECTS_TEMPLATE = PromptTemplate(
    id=TemplateId.OBJECTS,
    body=(
        "You are a professional scene designer. Based on the user requirements "
        "{User Constraint} and your domain knowledge, your task is to generate a list of "
        "objects commonly found in the described scene.  For each object, please include its "
        "frequency of appearance, typical dimensions ([x, y, z] in meters), and a brief "
        'description starting with "A DSLR photo of". Ensure that the object descriptions are '
        "consistent with the scene's style and reflect common human understanding. Output "
        "should be formatted as follows in JSON:\n"
        "Input:\n"
        "a living room\n"
        "Output:\n"
        '{"sofa": {"number":2, "size":[2.0,1.0,0.8], "description":"A DSLR photo of a plush, '
        'grey sectional sofa, featuring deep cushions and soft fabric."}, '
        '"coffee table":{"number":1, "size":[1.5,1.0,0.5], "description": "A DSLR photo of a '
        'round, glass-top coffee table with a modern design and a sturdy metal base."}, '
        '"TV":{"number":1, "size":[1.4, 0.8, 0.1], "description": "A DSLR photo of a large '
        'flat-screen TV, featuring a wide, slim display on the TV stand."}, '
        '"TV stand": {"number":1, "size":[1.0, 0.4, 0.5], "description": "A DSLR photo of a '
        'sleek, modern TV stand featuring open shelving and a minimalist design."}, '
        '"potted plant": {"number":2, "size":[0.5, 0.5, 1.0], "description": "A DSLR photo of '
        'a vibrant, lush plant with broad green leaves in a decorative pot."}}\n'
        "Now, let's design the scene: {input}"
    ),
)

ANCHORS_TEMPLATE = PromptTemplate(
    id=TemplateId.ANCHORS,
    body=(
        "You are a scene placement expert. Based on the user requirements {User Constraint} "
        "and your domain knowledge, your task is to determine the spatial relationship between "
        "an object and its environment based on the object's name and common human "
        "understanding. There are four relationships to choose from: 1. CENTER, the object is "
        "in the center of the scene 2. SIDE, the object is at the boundary of the scene "
        "3. CORNER, the object is in the corner of the scene 4. OTHERS, the object is in other "
        "places. When dealing with multiple similar objects, arrange their positions reasonably "
        "to prevent conflicts. Please return in the following example format in JSON format.\n"
        "Input:\n"
        '{"scene_type":"indoor scene", "scene_text":"a living room", "objects_list":["sofa1", '
        '"sofa2", "coffee table1", "TV1","TV stand1", "potted plant1", "potted plant2"]}\n'
        "Output:\n"
        '{"sofa1": SIDE, "sofa2": SIDE, "coffee table1": CENTER, "TV1": SIDE, '
        '"TV stand1": SIDE, "potted plant1": CORNER, "potted plant2": CORNER}\n'
        "Now, I need select for {input}"
    ),
)

RELATIONS_TEMPLATE = PromptTemplate(
    id=TemplateId.RELATIONS,
    body=(
        "You are an expert in scene arrangement. Based on the user requirements "
        "{User Constraint}, the given environment, and your domain knowledge, your task is to "
        "select objects from the provided list that are relevant to the current object based "
        "on common human usage, and describe their spatial or functional relationships. The "
        "possible relationships include: 1.LEFT, indicating the current object is at the left "
        "of the selected object. 2.RIGHT, indicating the current object is at the right of the "
        "selected object. 3.FRONT, indicating the current object is at the front of the "
        "selected object. 4.BEHIND, indicating the current object is at the behind of the "
        "selected object. 5.OVER, indicating the current object is above the selected object. "
        "6.UNDER, indicating the current object is below the selected object. 7.NEXT, "
        "indicating the current object is near the selected object. 8.OPPOSITE, indicating the "
        "current object is opposite the selected object. Output the selected object and their "
        "relationship in JSON format. For example:\n"
        "Input:\n"
        '{"scene_type": "indoor scene", "scene_text": "a living room","current_object": '
        '"sofa1", "objects_list": ["sofa2","coffee table1","TV1", "TV stand1", '
        '"potted plant1", "potted plant2"]}\n'
        "Output:\n"
        '{"sofa2": NEXT, "coffee table1": FRONT, "TV1": OPPOSITE, "TV stand1": OPPOSITE}\n'
        "Now, I need design for {input}"
    ),
)

TEMPLATES: dict[TemplateId, PromptTemplate] = {
    t.id: t for t in (OBJECTS_TEMPLATE, ANCHORS_TEMPLATE, RELATIONS_TEMPLATE)
}
