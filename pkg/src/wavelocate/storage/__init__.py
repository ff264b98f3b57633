"""Storage backends for wavelocate artifacts."""

from wavelocate.storage.filesystem import FilesystemStorage

__all__ = ["FilesystemStorage"]
