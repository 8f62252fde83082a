"""Exception types raised by the library."""


class ChaosCumError(ValueError):
    """Base class for all library errors."""


class ShapeMismatchError(ChaosCumError):
    """Tensors or expansions with incompatible order/dimension were combined."""

    def __init__(self, what, left, right):
        self.what = what
        self.left = left
        self.right = right
        super().__init__(f"{what} mismatch: {left!r} vs {right!r}")


class ContractionOrderError(ChaosCumError):
    """Contraction order r outside 0..min(p, q)."""

    def __init__(self, r, p, q):
        self.r, self.p, self.q = r, p, q
        super().__init__(f"contraction order r={r} not in [0, min({p}, {q})]")


class OrderCapError(ChaosCumError):
    """A product would create a kernel above the configured order cap."""

    def __init__(self, order, cap):
        self.order, self.cap = order, cap
        super().__init__(f"kernel order {order} exceeds order cap {cap}")


class InadmissiblePrefixError(ChaosCumError):
    """A c_q prefix hits a binomial with negative upper argument."""

    def __init__(self, q, rs):
        self.q, self.rs = q, tuple(rs)
        super().__init__(f"inadmissible contraction prefix {self.rs} for q={q}")


class KernelFormatError(ChaosCumError):
    """Malformed kernel / expansion JSON."""
