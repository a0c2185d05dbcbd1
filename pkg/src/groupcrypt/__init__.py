"""Group data-sharing access control toolkit.

Identity-based broadcast encryption behind a simulated enclave boundary,
an anonymous key-enveloping protocol, a hybrid-encryption baseline, storage
abstractions, and a trace-replay benchmark harness.
"""

__version__ = "0.1.0"
