import logging
from logging.handlers import RotatingFileHandler

from floodbma import env
from floodbma.logger import force_log_rotation, get_current_log_file, get_logger, reset_log_path


def _file_handlers(lg: logging.Logger) -> list[RotatingFileHandler]:
    return [h for h in lg.handlers if isinstance(h, RotatingFileHandler)]


def test_get_logger_is_cached_and_quiet():
    a = get_logger("floodbma.test_cached")
    b = get_logger("floodbma.test_cached")
    assert a is b
    assert a.propagate is False
    assert len(_file_handlers(a)) == 1


def test_run_id_selects_log_file(isolated_project):
    run_id = env.generate_run_id("fit", 42)
    path = reset_log_path()
    assert path.name == f"floodbma_{run_id}.log"
    assert path.parent == env.get_logs_root()
    assert get_current_log_file() == path

    lg = get_logger("floodbma.test_run_id")
    lg.info("hello")
    for h in _file_handlers(lg):
        h.flush()
    assert "hello" in path.read_text(encoding="utf-8")


def test_force_rotation_rolls_the_file(isolated_project):
    env.generate_run_id("rotate")
    path = reset_log_path()
    lg = get_logger("floodbma.test_rotation")
    lg.info("before rotation")
    assert force_log_rotation() is True
    # every cached logger rolls the shared file, so the backup index varies
    assert list(path.parent.glob(path.name + ".[0-9]"))

    lg.info("after rotation")
    for h in _file_handlers(lg):
        h.flush()
    assert "after rotation" in path.read_text(encoding="utf-8")
