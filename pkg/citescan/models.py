"""
Shared data models for the citation detection pipeline.
Corpus files, comments, entity spans and assembled citation records.
"""

from datetime import date
from enum import Enum
from pathlib import Path
from typing import Dict, FrozenSet, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Language(str, Enum):
    C = "C"
    CPP = "C++"
    JAVA = "Java"
    JAVASCRIPT = "JavaScript"
    PYTHON = "Python"
    PHP = "PHP"
    RUBY = "Ruby"


class EntityType(str, Enum):
    AUTHOR = "author"
    TITLE = "title"
    YEAR = "year"
    BOOKTITLE_OR_JOURNAL = "booktitle_or_journal"
    PAGES = "pages"
    VOLUME = "volume"
    NUMBER = "number"
    MONTH = "month"
    URL = "url"
    PUBLISHER = "publisher"
    ADDRESS = "address"
    DOI = "doi"
    ISBN = "isbn"
    ISSN = "issn"


# Record field holding each entity type
RECORD_FIELDS: Dict[EntityType, str] = {
    EntityType.AUTHOR: "authors",
    EntityType.TITLE: "title",
    EntityType.YEAR: "year",
    EntityType.BOOKTITLE_OR_JOURNAL: "venue",
    EntityType.PAGES: "pages",
    EntityType.VOLUME: "volume",
    EntityType.NUMBER: "number",
    EntityType.MONTH: "month",
    EntityType.URL: "url",
    EntityType.PUBLISHER: "publisher",
    EntityType.ADDRESS: "address",
    EntityType.DOI: "doi",
    EntityType.ISBN: "isbn",
    EntityType.ISSN: "issn",
}

FOUR_ENTITIES: FrozenSet[EntityType] = frozenset({
    EntityType.AUTHOR,
    EntityType.TITLE,
    EntityType.YEAR,
    EntityType.BOOKTITLE_OR_JOURNAL,
})


# Corpus
class RepoRef(BaseModel):
    model_config = ConfigDict(frozen=True)

    root_path: Path
    name: str
    commit_dates: Optional[Tuple[date, ...]] = None

    @field_validator('name')
    @classmethod
    def validate_name(cls, v):
        if not v:
            raise ValueError('repository name must be non-empty')
        return v

    @field_validator('root_path')
    @classmethod
    def validate_root(cls, v):
        if not v.is_dir():
            raise ValueError(f'repository root is not a directory: {v}')
        return v


class SourceFile(BaseModel):
    model_config = ConfigDict(frozen=True)

    repo: RepoRef
    rel_path: str
    language: Language

    @field_validator('rel_path')
    @classmethod
    def validate_rel_path(cls, v):
        if not v or '\\' in v or v.startswith('/'):
            raise ValueError(f'rel_path must be a relative forward-slash path: {v!r}')
        return v


# Comments
class Comment(BaseModel):
    model_config = ConfigDict(frozen=True)

    language: Language
    start_line: int = Field(ge=1)
    end_line: int
    raw_text: str
    kind: Literal['line', 'block']
    start: int = Field(ge=0)  # offset of raw_text in the file content
    end: int
    file: Optional[SourceFile] = None

    @model_validator(mode='after')
    def check_ranges(self):
        if not self.raw_text:
            raise ValueError('raw_text must be non-empty')
        if self.end_line < self.start_line:
            raise ValueError('end_line must be >= start_line')
        if self.end - self.start != len(self.raw_text):
            raise ValueError('content offsets do not match raw_text')
        return self


class Provenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    repo: str
    path: str
    line: int


class NormalizedComment(BaseModel):
    text: str
    occurrences: int = Field(ge=1)
    language: Language
    provenance: List[Provenance]

    @model_validator(mode='after')
    def check_occurrences(self):
        if self.occurrences != len(self.provenance):
            raise ValueError('occurrences must equal the number of provenance entries')
        return self


# Entities
class EntitySpan(BaseModel):
    model_config = ConfigDict(frozen=True)

    etype: EntityType
    start: int = Field(ge=0)
    end: int
    source: Literal['model', 'rule'] = 'model'

    @model_validator(mode='after')
    def check_order(self):
        if self.start >= self.end:
            raise ValueError(f'span start {self.start} must be < end {self.end}')
        return self

    def overlaps(self, other: 'EntitySpan') -> bool:
        return self.start < other.end and other.start < self.end

    def text_in(self, text: str) -> str:
        return text[self.start:self.end]


class AnnotatedComment(BaseModel):
    text: str
    gold: List[EntitySpan] = []
    labels: Dict[str, str] = {}

    @model_validator(mode='after')
    def check_bounds(self):
        for span in self.gold:
            if span.end > len(self.text):
                raise ValueError(f'gold span {span.start}..{span.end} exceeds text length {len(self.text)}')
        return self

    @property
    def cites(self) -> bool:
        """Only comments containing a citation carry gold entities"""
        return bool(self.gold)


# Detection
class DetectionCriterion(BaseModel):
    model_config = ConfigDict(frozen=True)

    required_types: FrozenSet[EntityType] = FOUR_ENTITIES
    max_gap: int = Field(default=10, ge=0)

    @field_validator('required_types')
    @classmethod
    def validate_required(cls, v):
        if not v:
            raise ValueError('required_types must be non-empty')
        return v

    def label(self) -> str:
        return ", ".join(t.value for t in EntityType if t in self.required_types)


class CitationRecord(BaseModel):
    authors: List[str] = []
    title: Optional[str] = None
    venue: Optional[str] = None
    year: Optional[str] = None
    volume: Optional[str] = None
    number: Optional[str] = None
    pages: Optional[str] = None
    month: Optional[str] = None
    publisher: Optional[str] = None
    address: Optional[str] = None
    doi: Optional[str] = None
    isbn: Optional[str] = None
    issn: Optional[str] = None
    url: Optional[str] = None
    span: Tuple[int, int]
    source_comment: Optional[str] = None
    entities: List[EntitySpan] = Field(default=[], exclude=True)

    @model_validator(mode='after')
    def check_record(self):
        populated = [name for name in RECORD_FIELDS.values() if getattr(self, name)]
        if not populated:
            raise ValueError('a citation record needs at least one populated field')
        for span in self.entities:
            if span.start < self.span[0] or span.end > self.span[1]:
                raise ValueError('record span must cover all member entities')
        return self


class DetectionResult(BaseModel):
    detected: bool
    records: List[CitationRecord] = []
    largest_gap: int = 0
    reason: Literal['ok', 'missing_types', 'gap_exceeded']

    @model_validator(mode='after')
    def check_consistency(self):
        if self.detected != (self.reason == 'ok'):
            raise ValueError('detected must be true exactly when reason is ok')
        if self.detected and not self.records:
            raise ValueError('a detection needs at least one record')
        return self
