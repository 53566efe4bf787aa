"""Stress тесты для проверки производительности."""
import asyncio
import time

import pytest

from lab import main
from services.equilibrium import default_grid, table2_report_async, table2_rows_async
from services.verification import SUITES, run_verification_async


@pytest.mark.asyncio
@pytest.mark.slow
async def test_stress_table2_all_levels():
    """
    Стресс-тест: энтропии Гиббса для n = 0..30
    Проверяет устойчивость рекурсии Эрмита на верхней границе
    """
    print("\n⏱️ Считаю G_n для 31 уровня...")

    start = time.time()
    report = await table2_report_async(30, default_grid())
    elapsed = time.time() - start

    print(f"✅ Рассчитано за {elapsed:.2f}s")

    assert len(report.levels) == 31
    assert report.is_strictly_decreasing()


@pytest.mark.asyncio
@pytest.mark.slow
async def test_stress_concurrent_tables():
    """
    Стресс-тест: несколько таблиц одновременно на разных сетках
    """
    print("\n⏱️ Считаю таблицы на четырёх сетках параллельно...")

    start = time.time()
    grids = [default_grid(points) for points in (4001, 6001, 8001, 12001)]
    results = await asyncio.gather(*(table2_rows_async(10, grid) for grid in grids))
    elapsed = time.time() - start

    print(f"✅ {len(results)} таблиц за {elapsed:.2f}s")

    for rows in results:
        assert [n for n, _, _ in rows] == list(range(11))
        assert all(error is None for _, _, error in rows)
    # значения на разных сетках согласуются
    for n in range(11):
        values = [rows[n][1] for rows in results]
        assert max(values) - min(values) < 1e-5


@pytest.mark.asyncio
@pytest.mark.slow
async def test_stress_verify_all_suites(lab_config):
    """
    Стресс-тест: все наборы проверок одновременно
    """
    print("\n⏱️ Запускаю все наборы проверок...")

    report = await run_verification_async('all', lab_config)

    print(f"✅ Пройдено {report.counts()[0]}/{report.counts()[1]} за {report.wall_time:.2f}s")

    assert [c.name for c in report.failures()] == []
    prefixes = {c.name.split('/')[0] for c in report.checks}
    assert prefixes == set(SUITES)


@pytest.mark.slow
def test_stress_cli_verify_all(capsys, monkeypatch):
    """
    Стресс-тест: полный прогон через командную строку
    """
    monkeypatch.delenv('MADELUNG_LAB_CONFIG', raising=False)
    assert main(['verify']) == 0
    assert '# suite=all' in capsys.readouterr().out
