"""Shipped run configurations reproducing the reference experiments."""

from importlib import resources

__all__ = ["preset_path", "list_presets"]


def list_presets() -> list:
    files = resources.files(__name__)
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".cfg"))


def preset_path(name: str):
    """Filesystem path of a named preset, or None if unknown."""
    candidate = resources.files(__name__) / f"{name}.cfg"
    return candidate if candidate.is_file() else None
