"""Registro de corridas.

Revision ID: 001_run_registry
Revises:
Create Date: 2026-10-17

"""
from alembic import op
import sqlalchemy as sa
from sqlalchemy import inspect


revision = '001_run_registry'
down_revision = None
branch_labels = None
depends_on = None


def _table_exists(bind, table_name: str) -> bool:
    return inspect(bind).has_table(table_name)


def upgrade() -> None:
    """Crear la tabla run_reports (omite si ya existe)"""
    bind = op.get_bind()

    if not _table_exists(bind, 'run_reports'):
        op.create_table(
            'run_reports',
            sa.Column('id', sa.Integer(), nullable=False),
            sa.Column('scenario_id', sa.String(255), nullable=False),
            sa.Column('seed', sa.Integer(), nullable=False),
            sa.Column('router', sa.String(64), nullable=False),
            sa.Column('created', sa.Integer(), nullable=False),
            sa.Column('started', sa.Integer(), nullable=False),
            sa.Column('relayed', sa.Integer(), nullable=False),
            sa.Column('aborted', sa.Integer(), nullable=False),
            sa.Column('dropped', sa.Integer(), nullable=False),
            sa.Column('removed', sa.Integer(), nullable=False),
            sa.Column('delivered', sa.Integer(), nullable=False),
            sa.Column('delivery_prob', sa.Float(), nullable=False),
            sa.Column('overhead_ratio', sa.Float(), nullable=True),
            sa.Column('latency_avg', sa.Float(), nullable=True),
            sa.Column('latency_med', sa.Float(), nullable=True),
            sa.Column('hopcount_avg', sa.Float(), nullable=True),
            sa.Column('event_log', sa.String(1024), nullable=True),
            sa.Column('created_at', sa.DateTime(), nullable=True),
            sa.PrimaryKeyConstraint('id')
        )
        op.create_index(op.f('ix_run_reports_id'), 'run_reports', ['id'], unique=False)
        op.create_index(op.f('ix_run_reports_scenario_id'), 'run_reports', ['scenario_id'], unique=False)
        op.create_index(op.f('ix_run_reports_router'), 'run_reports', ['router'], unique=False)


def downgrade() -> None:
    op.drop_index(op.f('ix_run_reports_router'), table_name='run_reports')
    op.drop_index(op.f('ix_run_reports_scenario_id'), table_name='run_reports')
    op.drop_index(op.f('ix_run_reports_id'), table_name='run_reports')
    op.drop_table('run_reports')
