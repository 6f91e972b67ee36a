"""Bundled toy corpus for walkthroughs and end-to-end tests."""

from importlib import resources


def toy_path(name: str) -> str:
    """Absolute path of a bundled toy-corpus file, e.g. toy_path("manifest.jsonl")."""
    return str(resources.files(__package__).joinpath("toy", name))
