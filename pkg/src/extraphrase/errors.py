class ExtraphraseError(Exception):
    pass


class ArgumentError(ExtraphraseError, ValueError):
    pass


class DegenerateInput(ExtraphraseError, ValueError):
    pass


class ConfigError(ExtraphraseError, ValueError):
    pass
