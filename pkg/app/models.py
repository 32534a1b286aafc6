# =====================================================
# MODELOS - Reportes de corrida persistidos
# =====================================================

from datetime import datetime

from sqlalchemy import Column, DateTime, Float, Integer, String

from app.database import Base


class RunRecord(Base):
    """MessageStatsReport de una corrida registrada"""
    __tablename__ = "run_reports"

    id = Column(Integer, primary_key=True, index=True)
    scenario_id = Column(String(255), nullable=False, index=True)
    seed = Column(Integer, nullable=False)
    router = Column(String(64), nullable=False, index=True)

    created = Column(Integer, nullable=False, default=0)
    started = Column(Integer, nullable=False, default=0)
    relayed = Column(Integer, nullable=False, default=0)
    aborted = Column(Integer, nullable=False, default=0)
    dropped = Column(Integer, nullable=False, default=0)
    removed = Column(Integer, nullable=False, default=0)
    delivered = Column(Integer, nullable=False, default=0)

    delivery_prob = Column(Float, nullable=False, default=0.0)
    # Nulos cuando no hubo entregas
    overhead_ratio = Column(Float)
    latency_avg = Column(Float)
    latency_med = Column(Float)
    hopcount_avg = Column(Float)

    event_log = Column(String(1024))
    created_at = Column(DateTime, default=datetime.utcnow)

    def __repr__(self):
        return f"<RunRecord(id={self.id}, scenario={self.scenario_id}, router={self.router}, seed={self.seed})>"
