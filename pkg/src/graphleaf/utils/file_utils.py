"""File and directory utilities."""

import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Union

from ..exceptions import OutputDirectoryError

PathLike = Union[str, Path]


def ensure_directory_exists(path: PathLike) -> Path:
    """Ensure that a directory exists, creating it if necessary."""
    directory = Path(path)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputDirectoryError(f"cannot create directory {directory}: {e}")
    return directory


def get_file_extension(filename: PathLike) -> str:
    """Get the lower-case file extension without the leading dot."""
    return Path(filename).suffix.lower().lstrip('.')


def list_files_with_extensions(directory: PathLike,
                               extensions: Iterable[str]) -> List[Path]:
    """List regular files in ``directory`` whose extension is in ``extensions``.

    The result is sorted by file name so enumeration order is stable.
    """
    directory_path = Path(directory)

    if not directory_path.is_dir():
        return []

    wanted = {ext.lower().lstrip('.') for ext in extensions}
    files = [
        path for path in directory_path.iterdir()
        if path.is_file() and get_file_extension(path) in wanted
    ]
    return sorted(files, key=lambda p: p.name)


def atomic_write_bytes(path: PathLike, payload: bytes) -> None:
    """Write ``payload`` to ``path`` through a temporary file in the same directory."""
    target = Path(path)
    try:
        fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    except OSError as e:
        raise OutputDirectoryError(f"cannot write {target}: {e}")

    try:
        with os.fdopen(fd, 'wb') as fh:
            fh.write(payload)
        os.replace(tmp_name, target)
    except OSError as e:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise OutputDirectoryError(f"cannot write {target}: {e}")


def atomic_write_text(path: PathLike, text: str) -> None:
    """Write UTF-8 text to ``path`` atomically."""
    atomic_write_bytes(path, text.encode('utf-8'))


def format_file_size(size_bytes: float) -> str:
    """Format file size in human-readable format."""
    if size_bytes == 0:
        return "0 B"

    size_names = ["B", "KB", "MB", "GB", "TB"]
    i = 0

    while size_bytes >= 1024 and i < len(size_names) - 1:
        size_bytes /= 1024.0
        i += 1

    return f"{size_bytes:.1f} {size_names[i]}"
