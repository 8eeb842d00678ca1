"""Sample taxonomy: attack categories, subtypes, and labeled sample records."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .cot import Verdict


class Category(Enum):
    LIVE = "Live"
    REPLAY = "Replay"
    PRINT = "Print"
    MASK = "Mask"


class Subtype(Enum):
    PHOTO = "Photo"
    NEWSPAPER = "Newspaper"
    POSTER = "Poster"
    ALBUM = "Album"
    A4 = "A4"
    FACIAL_PRINT = "FacialPrint"
    UPPER_BODY = "UpperBody"
    PHONE = "Phone"
    PAD = "Pad"
    PC = "PC"
    MASK_3D = "Mask3D"
    REGION_MASK = "RegionMask"
    GARAGEKIT = "Garagekit"
    ADULTDULL = "Adultdull"
    LIVING = "Living"


SUBTYPE_CATEGORY: dict[Subtype, Category] = {
    Subtype.PHOTO: Category.PRINT,
    Subtype.NEWSPAPER: Category.PRINT,
    Subtype.POSTER: Category.PRINT,
    Subtype.ALBUM: Category.PRINT,
    Subtype.A4: Category.PRINT,
    Subtype.FACIAL_PRINT: Category.PRINT,
    Subtype.UPPER_BODY: Category.PRINT,
    Subtype.PHONE: Category.REPLAY,
    Subtype.PAD: Category.REPLAY,
    Subtype.PC: Category.REPLAY,
    Subtype.MASK_3D: Category.MASK,
    Subtype.REGION_MASK: Category.MASK,
    Subtype.GARAGEKIT: Category.MASK,
    Subtype.ADULTDULL: Category.MASK,
    Subtype.LIVING: Category.LIVE,
}

CATEGORY_SUBTYPES: dict[Category, tuple[Subtype, ...]] = {
    cat: tuple(s for s in Subtype if SUBTYPE_CATEGORY[s] is cat) for cat in Category
}


class UnknownSubtypeError(ValueError):
    def __init__(self, value):
        self.value = value
        super().__init__(f"unknown subtype: {value!r}")


def subtype_label(subtype: Subtype) -> Verdict:
    """Ground truth implied by the subtype: only Living is not a spoof."""
    return Verdict.NO if subtype is Subtype.LIVING else Verdict.YES


@dataclass(frozen=True)
class SampleRecord:
    id: str
    image_ref: str
    label: Verdict
    category: Category
    subtype: Subtype

    def __post_init__(self):
        if not isinstance(self.subtype, Subtype):
            raise UnknownSubtypeError(self.subtype)
        expected_cat = SUBTYPE_CATEGORY[self.subtype]
        if self.category is not expected_cat:
            raise ValueError(
                f"subtype {self.subtype.value} belongs to category {expected_cat.value},"
                f" not {self.category.value}"
            )
        if self.label is not subtype_label(self.subtype):
            raise ValueError(f"subtype {self.subtype.value} requires label {subtype_label(self.subtype).value}")

    @classmethod
    def make(cls, id: str, image_ref: str, subtype: Subtype) -> "SampleRecord":
        """Fill in the category and label implied by the subtype."""
        return cls(id, image_ref, subtype_label(subtype), SUBTYPE_CATEGORY[subtype], subtype)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "image_ref": self.image_ref,
            "label": self.label.value,
            "category": self.category.value,
            "subtype": self.subtype.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SampleRecord":
        try:
            subtype = Subtype(d["subtype"])
        except ValueError:
            raise UnknownSubtypeError(d.get("subtype")) from None
        return cls(
            id=d["id"],
            image_ref=d["image_ref"],
            label=Verdict(d["label"]),
            category=Category(d["category"]),
            subtype=subtype,
        )
