"""Structured pass/fail records for identity checks."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Witness:
    """First failing coefficient of an identity check."""

    location: tuple[str, ...]
    expected: str
    got: str


@dataclass(frozen=True)
class IdentityReport:
    identity: str
    params: tuple[tuple[str, str], ...]
    status: str  # "PASS" or "FAIL"
    witness: Witness | None = None

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def describe(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.params)
        head = f"{self.status} {self.identity}" + (f" [{params}]" if params else "")
        if self.witness is None:
            return head
        w = self.witness
        return (
            f"{head} at {'(' + ', '.join(w.location) + ')'}: "
            f"expected {w.expected}, got {w.got}"
        )


def report_pass(identity: str, **params: object) -> IdentityReport:
    return IdentityReport(
        identity, tuple((k, str(v)) for k, v in params.items()), "PASS"
    )


def report_fail(
    identity: str,
    location: tuple[str, ...],
    expected: object,
    got: object,
    **params: object,
) -> IdentityReport:
    return IdentityReport(
        identity,
        tuple((k, str(v)) for k, v in params.items()),
        "FAIL",
        Witness(tuple(location), str(expected), str(got)),
    )
