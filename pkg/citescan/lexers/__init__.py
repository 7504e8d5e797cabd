from typing import Dict, List, Optional, Type

from ..models import Comment, Language, SourceFile
from .base import CommentScanner, Grammar
from .c_family import CppScanner, CScanner, JavaScanner, JavaScriptScanner
from .php import PhpScanner
from .python import PythonScanner
from .ruby import RubyScanner

SCANNERS: Dict[Language, Type[CommentScanner]] = {
    Language.C: CScanner,
    Language.CPP: CppScanner,
    Language.JAVA: JavaScanner,
    Language.JAVASCRIPT: JavaScriptScanner,
    Language.PYTHON: PythonScanner,
    Language.PHP: PhpScanner,
    Language.RUBY: RubyScanner,
}


def scan_comments(content: str, language: Language, file: Optional[SourceFile] = None) -> List[Comment]:
    return SCANNERS[language](content, language, file).scan()


__all__ = ['SCANNERS', 'CommentScanner', 'Grammar', 'scan_comments']
