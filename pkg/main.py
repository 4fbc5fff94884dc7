from cli.experiment_tools import toolkit


if __name__ == "__main__":
    # python main.py duality --algebra "diagonal(2)" --state plus
    toolkit()
