from abc import ABC, abstractmethod


class NonFiniteError(RuntimeError):
    def __init__(self, client: int, round: int, what: str = "loss"):
        self.client = client
        self.round = round
        super(NonFiniteError, self).__init__(f"non-finite {what} for client {client} in round {round}")


class BaseTrainer(ABC):
    @staticmethod
    def add_args(parser):
        """Add trainer-specific arguments to the parser."""
        pass

    @classmethod
    @abstractmethod
    def build_trainer_from_args(cls, args):
        """Build a new trainer instance."""
        raise NotImplementedError("Trainers must implement the build_trainer_from_args method")

    @abstractmethod
    def fit(self, task, topology):
        raise NotImplementedError
