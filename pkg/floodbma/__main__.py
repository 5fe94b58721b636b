# floodbma/__main__.py
from floodbma.cli import app

if __name__ == "__main__":
    app()
