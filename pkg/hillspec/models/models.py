from sqlalchemy import Column, Integer, String, DateTime, ForeignKey, Float, Text
from sqlalchemy.orm import relationship
from datetime import datetime

from hillspec.database.setup import Base


class RunRecord(Base):
    """One CLI run of a verification suite"""
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True)
    suite = Column(String, nullable=False)
    config_digest = Column(String, nullable=False)
    version = Column(String)
    started_at = Column(DateTime, default=datetime.utcnow)
    wall_seconds = Column(Float, default=0.0)
    exit_code = Column(Integer, nullable=False)
    failed_stage = Column(String)
    manifest_json = Column(Text)

    # Relationships
    files = relationship("RunFile", back_populates="run", cascade="all, delete-orphan")


class RunFile(Base):
    """An emitted file and its content hash"""
    __tablename__ = "run_files"

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey("runs.id"), nullable=False)
    path = Column(String, nullable=False)
    sha256 = Column(String, nullable=False)
    size = Column(Integer)

    # Relationships
    run = relationship("RunRecord", back_populates="files")
