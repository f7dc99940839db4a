import pathlib


def runcard_path(experiment: str) -> pathlib.Path:
    return pathlib.Path(__file__).with_name(f"{experiment}.yml")
