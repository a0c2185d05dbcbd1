"""Exception taxonomy shared by all groupcrypt modules."""

from __future__ import annotations


class GroupCryptError(Exception):
    """Base class for every error raised by this package."""


class SerializationError(GroupCryptError):
    """Malformed or non-canonical bytes for a wire-format object."""


class InvalidElementError(GroupCryptError):
    """A group element failed on-curve or subgroup validation."""


class CapacityError(GroupCryptError):
    """A receiver set exceeds the maximum partition size."""


class DuplicateError(GroupCryptError):
    """An identifier was supplied twice where uniqueness is required."""


class MembershipError(GroupCryptError):
    """The acting user is not part of the relevant receiver set."""


class DegenerateKeyError(GroupCryptError):
    """A hashed identity collides with the master secret (gamma + H(u) = 0)."""


class IntegrityError(GroupCryptError):
    """A seal, MAC, or signature failed verification."""


class AuthenticationError(GroupCryptError):
    """Key derivation failed: the caller does not hold a usable key."""


class AccessDeniedError(GroupCryptError):
    """No envelope fragment (or ACL entry) grants the caller access."""


class PermissionDeniedError(GroupCryptError):
    """The acting user lacks the required reader/writer role."""


class NotFoundError(GroupCryptError):
    """The requested object id is absent from the store."""


class StoreError(GroupCryptError):
    """Invalid object id or backend failure in the storage layer."""


class TraceError(GroupCryptError):
    """A membership trace is malformed or violates add/remove invariants."""
