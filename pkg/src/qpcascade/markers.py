"""Sentinel values used instead of infinities in reported quantities."""


class _Marker:
    __slots__ = ("_label",)

    def __init__(self, label):
        self._label = label

    def __repr__(self):
        return self._label.upper()

    def __str__(self):
        return self._label

    def __reduce__(self):
        return (_lookup, (self._label,))


def _lookup(label):
    return _MARKERS[label]


#: A quality factor or lifetime with no finite limit (no quasiparticles, no loss).
UNBOUNDED = _Marker("unbounded")
#: T₁ has returned to the qubit's background value.
BASELINE = _Marker("baseline")

_MARKERS = {"unbounded": UNBOUNDED, "baseline": BASELINE}
