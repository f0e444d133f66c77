from sqlalchemy.orm import Session, selectinload
from sqlalchemy import select, delete, desc, func
from typing import List, Optional

from hillspec.models.models import RunRecord, RunFile
from hillspec.schemas.schemas import RunManifest


class LedgerService:
    def __init__(self, session: Session):
        self.session = session

    # Run operations
    def record_run(self, manifest: RunManifest) -> RunRecord:
        """Store a finished run and its file inventory"""
        wall = sum(stage.seconds for stage in manifest.stages)
        run = RunRecord(
            suite=manifest.suite.value,
            config_digest=manifest.config_digest,
            version=manifest.version,
            started_at=manifest.started_at,
            wall_seconds=wall,
            exit_code=manifest.exit_code,
            failed_stage=manifest.failed_stage,
            manifest_json=manifest.model_dump_json(),
        )
        run.files = [RunFile(path=f.path, sha256=f.sha256, size=f.size) for f in manifest.files]
        self.session.add(run)
        self.session.commit()
        self.session.refresh(run)
        return run

    def get_runs(self, suite: Optional[str] = None, limit: int = 50, offset: int = 0) -> List[RunRecord]:
        """Most recent runs first"""
        query = (select(RunRecord).options(selectinload(RunRecord.files))
                 .order_by(desc(RunRecord.id)).offset(offset).limit(limit))
        if suite:
            query = query.where(RunRecord.suite == suite)
        return list(self.session.execute(query).scalars().all())

    def get_runs_count(self, suite: Optional[str] = None) -> int:
        query = select(func.count()).select_from(RunRecord)
        if suite:
            query = query.where(RunRecord.suite == suite)
        return self.session.execute(query).scalar()

    def runs_with_digest(self, config_digest: str) -> List[RunRecord]:
        """Earlier runs of the same configuration, oldest first"""
        query = (select(RunRecord).options(selectinload(RunRecord.files))
                 .where(RunRecord.config_digest == config_digest).order_by(RunRecord.id))
        return list(self.session.execute(query).scalars().all())

    def clear(self) -> int:
        """Delete every recorded run; returns how many were removed"""
        count = self.get_runs_count()
        self.session.execute(delete(RunFile))
        self.session.execute(delete(RunRecord))
        self.session.commit()
        return count
