from sqlalchemy import Column, Integer, String, ForeignKey, JSON, DateTime
from sqlalchemy.orm import relationship
from datetime import datetime
from ..database import Base


class RunRecord(Base):
    __tablename__ = "runs"
    id = Column(Integer, primary_key=True, index=True)
    command = Column(String, index=True)
    config_path = Column(String)
    config_hash = Column(String, nullable=True)
    seed = Column(Integer, nullable=True)
    workers = Column(Integer, nullable=True)
    out_dir = Column(String, nullable=True)
    status = Column(String, default="pending")  # 'pending', 'running', 'completed', 'failed'
    exit_code = Column(Integer, nullable=True)
    artifacts = Column(JSON, default=list)
    summary = Column(JSON, default=dict)
    error = Column(JSON, nullable=True)
    created_at = Column(DateTime, default=datetime.utcnow)
    started_at = Column(DateTime, nullable=True)
    completed_at = Column(DateTime, nullable=True)

    logs = relationship("RunLog", back_populates="run", cascade="all, delete-orphan")


class RunLog(Base):
    __tablename__ = "run_logs"
    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("runs.id"))
    step = Column(Integer)
    action = Column(String)  # 'started', 'configured', 'artifact', 'completed', 'failed'
    detail = Column(JSON, nullable=True)
    error = Column(String, nullable=True)
    logged_at = Column(DateTime, default=datetime.utcnow)

    run = relationship("RunRecord", back_populates="logs")
