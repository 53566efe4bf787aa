"""Integration тесты командной строки: код завершения, формат вывода, файлы."""
import json

import numpy as np
import pytest

from config.config import CONFIG_ENV
from lab import MadelungLab, main
from services.exporters import load_wavefunction
from services.numerics import integrate_array


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Запуск без внешнего файла конфигурации"""
    monkeypatch.delenv(CONFIG_ENV, raising=False)


def _data_lines(text):
    return [line for line in text.splitlines() if not line.startswith('#')]


# ===== ТЕСТЫ table2 =====

def test_table2_default(capsys):
    """
    Полный поток: таблица G_n для n = 0..10 с допуском 1e-4
    """
    assert main(['table2']) == 0
    out = capsys.readouterr().out
    assert out.startswith('# command=table2\n')
    lines = _data_lines(out)
    assert lines[0] == 'n,G_n,gap,delta_vs_paper,status'
    assert len(lines) == 12
    assert all(line.endswith(',pass') for line in lines[1:])
    assert lines[1].startswith('0,-1.07236,,')


def test_table2_beyond_reference(capsys):
    """Тест: строки без опорного значения не влияют на код завершения"""
    assert main(['table2', '--n-max', '12']) == 0
    lines = _data_lines(capsys.readouterr().out)
    assert lines[-1].endswith(',no reference')
    assert lines[-2].endswith(',no reference')
    assert lines[-3].endswith(',pass')


def test_table2_coarse_grid_fails(capsys):
    """Тест: на сетке из 201 узла строки выходят за допуск и код равен 1"""
    assert main(['--grid-points', '201', 'table2']) == 1
    lines = _data_lines(capsys.readouterr().out)
    assert any(line.endswith(',fail') for line in lines[1:])
    assert not any(line.endswith(',error') for line in lines[1:])


def test_table2_unnormalized_grid_reports_errors(capsys):
    """Тест: на сетке из 61 узла плотности не нормированы, строки помечены error"""
    assert main(['--grid-points', '61', 'table2']) == 1
    lines = _data_lines(capsys.readouterr().out)
    assert any(line.endswith(',,,error') for line in lines[1:])


def test_table2_row_tolerance_meta(capsys):
    """Тест: поправка допуска строки 9 видна в метаданных"""
    assert main(['table2']) == 0
    assert '# row_tolerance=9:0.0002\n' in capsys.readouterr().out
    assert main(['table2', '--n-max', '3']) == 0
    assert '# row_tolerance=\n' in capsys.readouterr().out


def test_table2_tight_tolerance_fails(capsys):
    """Тест: допуск строже точности опорной таблицы даёт код 1"""
    assert main(['--tol', 'table2=1e-12', 'table2']) == 1


def test_table2_json(capsys):
    """Тест JSON-вывода таблицы"""
    assert main(['--format', 'json', 'table2', '--n-max', '2']) == 0
    data = json.loads(capsys.readouterr().out)
    assert data['meta']['n_max'] == 2
    assert [row['n'] for row in data['rows']] == [0, 1, 2]
    assert data['rows'][0]['gap'] is None


def test_table2_rejects_large_n(capsys):
    """Тест: n_max > 30 - ошибка использования"""
    assert main(['table2', '--n-max', '31']) == 2
    assert capsys.readouterr().out == ''


# ===== ТЕСТЫ verify =====

def test_verify_boltzmann_suite(capsys):
    """Тест набора boltzmann: все проверки проходят"""
    assert main(['verify', 'boltzmann']) == 0
    out = capsys.readouterr().out
    assert '# suite=boltzmann' in out
    lines = _data_lines(out)
    assert lines[0] == 'check,target,computed,tolerance,pass'
    assert all(line.endswith(',true') for line in lines[1:])


def test_verify_density_convention_fails(tmp_path, capsys):
    """Тест: соглашение 'density' для стока проваливает проверки затухания"""
    path = tmp_path / "lab.json"
    path.write_text(json.dumps({'sink_convention': 'density'}), encoding='utf-8')
    assert main(['--config', str(path), 'verify', 'schrodinger']) == 1
    assert 'sink_continuity' in capsys.readouterr().out


def test_verify_unknown_suite(capsys):
    """Тест: неизвестный набор - код 2 без вывода"""
    assert main(['verify', 'bogus']) == 2
    assert capsys.readouterr().out == ''


# ===== ТЕСТЫ decay =====

def test_decay_from_rates(capsys):
    """Тест: скорости 0.5,0.5 дают τ = 1 и норму e^{-2t}"""
    assert main(['decay', '--rates', '0.5,0.5', '--t-max', '2', '--steps', '4']) == 0
    out = capsys.readouterr().out
    assert '# rates=0.5;0.5\n' in out
    assert '# tau=1\n' in out
    lines = _data_lines(out)
    assert lines[0] == 't,norm,predicted,residual'
    assert len(lines) == 6
    assert lines[-1].startswith('2,0.0183156,0.0183156,')


def test_decay_invalid_tau(capsys):
    """Тест: неположительное τ и нулевые скорости - ошибка использования"""
    assert main(['decay', '--tau', '0']) == 2
    assert main(['decay', '--rates', '0,0']) == 2


def test_decay_bad_rates_argument(capsys):
    """Тест: нечисловой список скоростей отклоняется парсером"""
    assert main(['decay', '--rates', 'a,b']) == 2


# ===== ТЕСТЫ boltzmann =====

def test_boltzmann_json(capsys):
    """Тест: K_B T = ½, E = ½N, произведение неопределённостей ¼"""
    assert main(['--format', 'json', 'boltzmann']) == 0
    data = json.loads(capsys.readouterr().out)
    assert data['command'] == 'boltzmann'
    assert data['lock']['thermal_energy'] == pytest.approx(0.5)
    assert data['lock']['energy'] == pytest.approx(0.5)
    assert data['lock']['uncertainty_product'] == pytest.approx(0.25)
    assert data['lock']['pathology'] is False
    assert data['ensemble']['equilibrium']['passes'] is True


def test_boltzmann_scaling(capsys):
    """Тест: ω = 2 даёт K_B T = 1; N = 3 даёт E = 3"""
    assert main(['--format', 'json', 'boltzmann', '--omega', '2', '--N', '3']) == 0
    data = json.loads(capsys.readouterr().out)
    assert data['lock']['temperature_lock'] == pytest.approx(1.0)
    assert data['lock']['energy'] == pytest.approx(3.0)


def test_boltzmann_pathology_flag(capsys):
    """Тест: при ω -> 0 выставляется флаг непригодности"""
    main(['--format', 'json', 'boltzmann', '--omega', '1e-9'])
    data = json.loads(capsys.readouterr().out)
    assert data['lock']['pathology'] is True


def test_boltzmann_csv(capsys):
    """Тест CSV-вывода вложенного отчёта"""
    assert main(['boltzmann']) == 0
    out = capsys.readouterr().out
    assert out.startswith('quantity,value\n')
    assert 'lock.thermal_energy,0.5\n' in out


def test_boltzmann_invalid_mass(capsys):
    """Тест: неположительная масса - ошибка использования"""
    assert main(['boltzmann', '--m', '0']) == 2


# ===== ТЕСТЫ eigen =====

def test_eigen(capsys):
    """Тест: энергии решателя совпадают с n + ½"""
    assert main(['eigen', '--k', '3']) == 0
    lines = _data_lines(capsys.readouterr().out)
    assert lines[0] == 'n,energy,discrete_energy,analytic,abs_diff,status,vector'
    assert len(lines) == 4
    assert all(line.endswith(',pass,') for line in lines[1:])


def test_eigen_vectors(tmp_path, capsys):
    """Тест: собственные векторы сохраняются в CSV с заголовком и читаются обратно"""
    directory = tmp_path / "vectors"
    assert main(['eigen', '--k', '2', '--vectors', str(directory)]) == 0
    lines = _data_lines(capsys.readouterr().out)
    for n in range(2):
        path = directory / f"psi_{n}.csv"
        assert lines[n + 1].endswith(f",pass,{path}")
        psi = load_wavefunction(str(path))
        assert psi.grid.n_points == 4001
        assert psi.energy == pytest.approx(n + 0.5, abs=1e-4)
        density = np.abs(np.asarray(psi.values)) ** 2
        assert float(integrate_array(density, psi.grid.spacing)) == pytest.approx(1.0, abs=1e-6)


def test_eigen_vectors_write_failure(tmp_path, capsys):
    """Тест: недоступная директория векторов - код 2 без вывода"""
    blocker = tmp_path / "occupied"
    blocker.write_text('', encoding='utf-8')
    assert main(['eigen', '--k', '2', '--vectors', str(blocker)]) == 2
    assert capsys.readouterr().out == ''


def test_output_is_deterministic(capsys):
    """Тест: повторный запуск даёт побайтно тот же вывод"""
    main(['eigen', '--k', '2'])
    first = capsys.readouterr().out
    main(['eigen', '--k', '2'])
    assert capsys.readouterr().out == first


# ===== ТЕСТЫ ФАЙЛОВ И ОШИБОК =====

def test_out_file(tmp_path, capsys):
    """Тест: вывод в файл во вложенной директории"""
    path = tmp_path / "reports" / "eigen.csv"
    assert main(['--out', str(path), 'eigen', '--k', '2']) == 0
    assert capsys.readouterr().out == ''
    assert path.read_text(encoding='utf-8').startswith('# command=eigen\n')


def test_out_directory_is_error(tmp_path):
    """Тест: путь вывода, указывающий на директорию, - код 2"""
    assert main(['--out', str(tmp_path), 'eigen', '--k', '2']) == 2


def test_write_failure_is_error(mocker):
    """Тест: ошибка записи отчёта - код 2"""
    mocker.patch.object(MadelungLab, '_write_output', side_effect=OSError("disk full"))
    assert main(['eigen', '--k', '2']) == 2


@pytest.mark.parametrize("content", ["{broken", '{"speed_of_light": 1}', "[1, 2]"])
def test_bad_config_file(tmp_path, content):
    """Тест: неверный файл конфигурации - код 2"""
    path = tmp_path / "lab.json"
    path.write_text(content, encoding='utf-8')
    assert main(['--config', str(path), 'eigen']) == 2


def test_missing_config_file(tmp_path):
    """Тест: отсутствующий файл конфигурации - код 2"""
    assert main(['--config', str(tmp_path / "absent.json"), 'eigen']) == 2


@pytest.mark.parametrize("argv", [
    ['--window=1,1', 'eigen'],
    ['--tol', 'bogus=1', 'eigen'],
    ['--tol', 'table2', 'eigen'],
    ['--grid-points', '3', 'eigen'],
    ['integrate'],
    [],
])
def test_usage_errors(argv):
    """Тест ошибок использования"""
    assert main(argv) == 2


def test_help_exits_zero(capsys):
    """Тест: --help завершается с кодом 0"""
    assert main(['--help']) == 0
    assert 'madelung-lab' in capsys.readouterr().out
