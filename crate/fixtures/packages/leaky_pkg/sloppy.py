"""Service wrapper that keeps too much logic inline."""

class _ServiceImpl:
    def __init__(self, retries):
        self._retries = retries

    def ping(self):
        return "pong"

class Service:
    def __init__(self, retries):
        self._impl = _ServiceImpl(retries)

    def ping(self):
        return self._impl.ping()

    def compute(self, values):
        total = 0
        items = list(values)
        if items:
            total = len(items) + self._count(items)
        return total

    def render(self, value):
        return str(value)

    def _count(self, items):
        return len(items)
