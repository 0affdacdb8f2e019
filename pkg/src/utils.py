import hashlib
from pathlib import Path
import re
from typing import TypeVar


def sanitize_filename(name: str) -> str:
    illegals = r'[<>:"/\\|?*\s]+'
    name = name.lower().strip(" ")     # lowercase & trim whitespace
    name = re.sub(illegals, "_", name) # collapse illegals chars into one underscore
    return name or "report"


def sanitize_extension(extension: str | None) -> str:
    if extension is None:
        return ""
    extension = extension.strip()
    return extension[1:] if extension.startswith(".") else extension


def generate_unique_path(root: Path, stem: str, extension: str) -> Path:
    """A path under root that does not exist yet: stem.ext, stem-1.ext, ..."""
    root.mkdir(parents=True, exist_ok=True)
    base_name = sanitize_filename(stem)
    extension = sanitize_extension(extension)

    path = root.joinpath(f"{base_name}.{extension}")
    index = 1
    while path.exists():
        path = root.joinpath(f"{base_name}-{index}.{extension}")
        index += 1
    return path


def format_float(value: float) -> str:
    # shortest text that parses back to the same double
    return repr(float(value))


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


T = TypeVar('T')


def fallback(base: T, optional: T | None) -> T:
    return base if optional is None else optional
