"""Mixed class and function definitions."""

class Engine:
    def start(self):
        return True

class _EngineImpl:
    pass

def build():
    return Engine()

def _wire():
    pass
