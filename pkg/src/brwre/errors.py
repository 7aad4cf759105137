"""Exception hierarchy. The CLI maps each family to a distinct exit code."""


class BrwreError(Exception):
    exit_code = 1


class ConfigError(BrwreError, ValueError):
    exit_code = 2

    def __init__(self, message, line=None, section=None):
        self.line = line
        self.section = section
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if section is not None:
            prefix.append(f"[{section}]")
        full = f"{', '.join(prefix)}: {message}" if prefix else message
        super().__init__(full)


class InvalidLawError(BrwreError, ValueError):
    exit_code = 2


class BudgetExceeded(BrwreError):
    """An exhaustive computation would exceed its state budget."""

    exit_code = 3

    def __init__(self, states, budget):
        self.states = states
        self.budget = budget
        super().__init__(f"enumeration needs {states} states, budget is {budget}")


class NumericError(BrwreError, ArithmeticError):
    exit_code = 4


class NoCriticalTilt(NumericError):
    pass


class NonLatticeError(NumericError):
    pass


class ExampleRejected(BrwreError, ValueError):
    """A two-environment construction failed one of its five steps."""

    exit_code = 2

    def __init__(self, step, reason):
        self.step = step
        self.reason = reason
        super().__init__(f"step {step}: {reason}")
