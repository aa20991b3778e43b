class MeshFormatError(ValueError):
    """Raised when a mesh file cannot be parsed"""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class AssemblyError(RuntimeError):
    """Raised when a coefficient evaluates to a non-finite value"""

    def __init__(self, triangle: int, message: str):
        self.triangle = triangle
        super().__init__(f"triangle {triangle}: {message}")


class LinearSolveError(RuntimeError):
    """Raised when the sparse factorization breaks down"""

    def __init__(self, row: int, message: str):
        self.row = row
        super().__init__(f"row {row}: {message}")
