"""
Database engines and sessions for run bookkeeping.

The API creates tables through the async engine at startup; the command
line, the worker and the CRUD helpers use the sync session.
"""

from sqlalchemy import create_engine
from sqlalchemy.ext.asyncio import create_async_engine
from sqlalchemy.orm import DeclarativeBase, Session, sessionmaker

from config.settings import settings

async_engine = create_async_engine(
    settings.DATABASE_URL,
    echo=settings.DATABASE_ECHO,
    future=True
)

# Sessions cross threads through asyncio.to_thread
sync_engine = create_engine(
    settings.SYNC_DATABASE_URL,
    echo=settings.DATABASE_ECHO,
    connect_args={"check_same_thread": False} if settings.SYNC_DATABASE_URL.startswith("sqlite") else {}
)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=sync_engine)


class Base(DeclarativeBase):
    """Base class for the run tables."""
    pass


def get_sync_session() -> Session:
    """
    Dependency to get a sync database session.

    Yields:
        Session: Database session for run bookkeeping
    """
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


def init_sync_db():
    """Create the run tables through the sync engine (command line and worker)."""
    from ..models.runs import RunRecord, RunLog
    Base.metadata.create_all(bind=sync_engine)


async def init_db():
    """Create the run tables on application startup."""
    async with async_engine.begin() as conn:
        # Models must be imported so they register with Base
        from ..models.runs import RunRecord, RunLog
        await conn.run_sync(Base.metadata.create_all)
