from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import sessionmaker, declarative_base, Session
from pathlib import Path
from typing import Iterator, Union
from contextlib import contextmanager

# Ledger file inside each output directory
LEDGER_NAME = "ledger.db"

# Base class for models
Base = declarative_base()


def ledger_url(out_dir: Union[str, Path]) -> str:
    return f"sqlite:///{Path(out_dir) / LEDGER_NAME}"


def make_engine(out_dir: Union[str, Path]) -> Engine:
    """Engine for the run ledger of an output directory"""
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    return create_engine(ledger_url(out_dir), echo=False)


def init_db(engine: Engine):
    """Create the ledger tables"""
    # Import models to register them
    from hillspec.models.models import RunRecord, RunFile  # noqa: F401

    Base.metadata.create_all(engine)


@contextmanager
def get_session(out_dir: Union[str, Path]) -> Iterator[Session]:
    """Session on an initialized ledger"""
    engine = make_engine(out_dir)
    init_db(engine)
    session = sessionmaker(engine, expire_on_commit=False)()
    try:
        yield session
    finally:
        session.close()
        engine.dispose()
