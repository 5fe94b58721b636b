# Packaged defaults copied into ~/.floodbma and <project>/.floodbma/settings by `floodbma init`.
