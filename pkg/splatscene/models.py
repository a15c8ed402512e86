"""Value types shared across the planning, layout, composition and camera modules.

World frame: origin at the floor center, x right, y forward, z up. Yaw is a
rotation about +z and an object's local forward axis is +y, so a yaw of 0 faces
+y and forward(yaw) = (-sin yaw, cos yaw).
"""

import math
from enum import Enum
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.spatial.transform import Rotation

Vec3 = tuple[float, float, float]
Quat = tuple[float, float, float, float]

UNIT_TOLERANCE = 1e-6


def wrap_angle(angle: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


def yaw_towards(dx: float, dy: float) -> float:
    """Yaw whose forward axis points along (dx, dy); 0 for a zero vector."""
    if dx == 0.0 and dy == 0.0:
        return 0.0
    return math.atan2(-dx, dy)


def forward_xy(yaw: float) -> tuple[float, float]:
    return (-math.sin(yaw), math.cos(yaw))


def right_xy(yaw: float) -> tuple[float, float]:
    return (math.cos(yaw), math.sin(yaw))


class SceneKind(str, Enum):
    INDOOR = "indoor"
    OUTDOOR = "outdoor"


class AnchorRegion(str, Enum):
    CENTER = "CENTER"
    SIDE = "SIDE"
    CORNER = "CORNER"
    OTHERS = "OTHERS"

    @classmethod
    def parse(cls, name: str) -> "AnchorRegion":
        try:
            return cls(str(name).strip().upper())
        except ValueError:
            raise ValueError(f"unknown anchor region '{name}'") from None


class Relation(str, Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"
    FRONT = "FRONT"
    BEHIND = "BEHIND"
    OVER = "OVER"
    UNDER = "UNDER"
    NEXT = "NEXT"
    OPPOSITE = "OPPOSITE"

    @classmethod
    def parse(cls, name: str) -> "Relation":
        """Case-insensitive lookup; 'back' is accepted for BEHIND."""
        key = str(name).strip().upper()
        if key == "BACK":
            key = "BEHIND"
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown relation '{name}'") from None

    @property
    def inverse(self) -> "Relation | None":
        return _INVERSE.get(self)

    @property
    def symmetric(self) -> bool:
        return self in (Relation.NEXT, Relation.OPPOSITE)

    @property
    def vertical(self) -> bool:
        return self in (Relation.OVER, Relation.UNDER)


_INVERSE = {
    Relation.LEFT: Relation.RIGHT,
    Relation.RIGHT: Relation.LEFT,
    Relation.FRONT: Relation.BEHIND,
    Relation.BEHIND: Relation.FRONT,
    Relation.OVER: Relation.UNDER,
    Relation.UNDER: Relation.OVER,
}


class SceneDims(BaseModel):
    """Scene extent: a W x L x H room or an outdoor disk of a given radius."""

    model_config = ConfigDict(frozen=True)

    kind: SceneKind
    width: float | None = None
    length: float | None = None
    height: float | None = None
    radius: float | None = None

    @model_validator(mode="after")
    def _check_dims(self) -> "SceneDims":
        if self.kind is SceneKind.INDOOR:
            dims = {"width": self.width, "length": self.length, "height": self.height}
            for name, value in dims.items():
                if value is None or value <= 0:
                    raise ValueError(f"indoor scene needs {name} > 0")
            if self.radius is not None:
                raise ValueError("indoor scene takes no radius")
        else:
            if self.radius is None or self.radius <= 0:
                raise ValueError("outdoor scene needs radius > 0")
            if any(v is not None for v in (self.width, self.length, self.height)):
                raise ValueError("outdoor scene takes only a radius")
        return self

    @classmethod
    def indoor(cls, width: float, length: float, height: float) -> "SceneDims":
        return cls(kind=SceneKind.INDOOR, width=width, length=length, height=height)

    @classmethod
    def outdoor(cls, radius: float) -> "SceneDims":
        return cls(kind=SceneKind.OUTDOOR, radius=radius)

    @property
    def is_indoor(self) -> bool:
        return self.kind is SceneKind.INDOOR

    @property
    def scene_radius(self) -> float:
        """Half the shorter floor side indoors, the radius outdoors."""
        if self.is_indoor:
            return 0.5 * min(self.width, self.length)  # type: ignore[type-var]
        return float(self.radius)  # type: ignore[arg-type]

    def to_json_dict(self) -> dict:
        return self.model_dump(mode="json", exclude_none=True)


class Box3(BaseModel):
    """Axis-aligned box in meters."""

    model_config = ConfigDict(frozen=True)

    min: Vec3
    max: Vec3

    @model_validator(mode="after")
    def _check_order(self) -> "Box3":
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise ValueError(f"box min {self.min} exceeds max {self.max}")
        return self

    @classmethod
    def from_arrays(cls, lo: np.ndarray, hi: np.ndarray) -> "Box3":
        return cls(min=tuple(float(v) for v in lo), max=tuple(float(v) for v in hi))

    @classmethod
    def centered(cls, size: Vec3 | list[float]) -> "Box3":
        half = [0.5 * float(v) for v in size]
        return cls(min=tuple(-h for h in half), max=tuple(half))

    @property
    def extent(self) -> np.ndarray:
        return np.asarray(self.max) - np.asarray(self.min)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.min) + np.asarray(self.max))

    def corners(self) -> np.ndarray:
        xs, ys, zs = zip(self.min, self.max)
        return np.array([[x, y, z] for x in xs for y in ys for z in zs], dtype=np.float64)

    def union(self, other: "Box3") -> "Box3":
        return Box3.from_arrays(
            np.minimum(self.min, other.min), np.maximum(self.max, other.max)
        )

    def inflate(self, amount: float) -> "Box3":
        return Box3.from_arrays(
            np.asarray(self.min) - amount, np.asarray(self.max) + amount
        )

    def translate(self, t: np.ndarray | Vec3) -> "Box3":
        t = np.asarray(t, dtype=np.float64)
        return Box3.from_arrays(np.asarray(self.min) + t, np.asarray(self.max) + t)

    def contains(self, point: np.ndarray | Vec3, tol: float = 0.0) -> bool:
        p = [float(v) for v in point]
        return all(
            lo - tol <= v <= hi + tol for v, lo, hi in zip(p, self.min, self.max)
        )


@lru_cache(maxsize=4096)
def _rotation_matrix(q: Quat) -> np.ndarray:
    m = Rotation.from_quat(q, scalar_first=True).as_matrix()
    m.setflags(write=False)
    return m


class AffineTransform(BaseModel):
    """Uniform scale s, rotation r (unit quaternion, w x y z) and translation t.

    Maps a model-space point x to r * (s * x) + t.
    """

    model_config = ConfigDict(frozen=True)

    s: float = Field(1.0, gt=0)
    r: Quat = (1.0, 0.0, 0.0, 0.0)
    t: Vec3 = (0.0, 0.0, 0.0)

    @field_validator("s", mode="before")
    @classmethod
    def _scalar_scale(cls, v):
        if isinstance(v, (list, tuple)):
            raise ValueError("affine scale must be a single uniform factor")
        return v

    @field_validator("r")
    @classmethod
    def _unit_quaternion(cls, q: Quat) -> Quat:
        norm = math.sqrt(sum(c * c for c in q))
        if abs(norm - 1.0) > UNIT_TOLERANCE:
            raise ValueError(f"rotation quaternion must be unit length, got norm {norm}")
        return q

    @classmethod
    def identity(cls) -> "AffineTransform":
        return cls()

    @classmethod
    def from_yaw(
        cls, yaw: float, s: float = 1.0, t: Vec3 | list[float] = (0.0, 0.0, 0.0)
    ) -> "AffineTransform":
        half = 0.5 * yaw
        return cls(
            s=s,
            r=(math.cos(half), 0.0, 0.0, math.sin(half)),
            t=tuple(float(v) for v in t),
        )

    def rotation(self) -> Rotation:
        return Rotation.from_quat(self.r, scalar_first=True)

    def matrix(self) -> np.ndarray:
        """3x3 rotation matrix (read-only)."""
        return _rotation_matrix(tuple(self.r))

    @property
    def yaw(self) -> float:
        """Heading of the rotated local +y axis."""
        m = self.matrix()
        return yaw_towards(float(m[0, 1]), float(m[1, 1]))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return (pts * self.s) @ self.matrix().T + np.asarray(self.t)

    def with_translation(self, t: Vec3 | list[float]) -> "AffineTransform":
        return self.model_copy(update={"t": tuple(float(v) for v in t)})


class CameraPose(BaseModel):
    """Eye position with yaw/pitch heading (radians) and vertical field of view."""

    model_config = ConfigDict(frozen=True)

    position: Vec3
    yaw: float
    pitch: float = Field(0.0, ge=-math.pi / 2, le=math.pi / 2)
    fov: float = Field(math.radians(60.0), gt=0, lt=math.pi)

    def forward(self) -> np.ndarray:
        cp = math.cos(self.pitch)
        return np.array(
            [-math.sin(self.yaw) * cp, math.cos(self.yaw) * cp, math.sin(self.pitch)]
        )
