from os import path, sep


class Calculator:
    base: int = 0

    def __init__(self, base: int):
        self.base = base

    def add(self, a: int, b: int) -> int:
        return (a + b) + self.base

    def sub(self, a: int, b: int) -> int:
        return self.add(a, -b)
