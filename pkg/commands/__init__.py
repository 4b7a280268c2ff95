from .gen_data_command import setup_gen_data_command
from .split_command import setup_split_command
from .train_command import setup_train_command
from .eval_command import setup_eval_command
from .ablate_command import setup_ablate_command
from .gradcheck_command import setup_gradcheck_command
from .score_command import setup_score_command
from .common import CliParser


class CommandManager:
    def __init__(self, prog: str = 'orthoproto'):
        self.parser = CliParser(
            prog=prog,
            description='Open-set recognition with feature-activation and orthogonal prototype learning',
        )
        self.subparsers = self.parser.add_subparsers(dest='command', metavar='COMMAND')
        self.subparsers.required = True
        self.setup_functions = [
            setup_gen_data_command,
            setup_split_command,
            setup_train_command,
            setup_eval_command,
            setup_ablate_command,
            setup_gradcheck_command,
            setup_score_command,
        ]

    def setup(self) -> CliParser:
        """Register all sub-commands"""
        for setup_function in self.setup_functions:
            setup_function(self.subparsers)
        return self.parser
