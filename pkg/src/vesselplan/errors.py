"""Exceptions shared by the search, routing and verification code."""


class PlanningError(Exception):
    pass


class Unreachable(PlanningError):
    """No direct or refuelling-stop routing respects the fuel reserve."""


class NoRoute(PlanningError):
    """Some destination of a delivery cannot be reached under fuel limits."""


class Infeasible(PlanningError):
    """The cargo cannot all be delivered within the restricted plan space."""


class SolveTimeout(PlanningError):
    """Wall-clock or expansion limit hit before the search finished."""


class SizeGuard(PlanningError):
    """Instance too large for the brute-force oracle."""
