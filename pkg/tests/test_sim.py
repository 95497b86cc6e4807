import random

import pytest

from castor.machine import (HALT, LEFT, RIGHT, Transition, TransitionTable,
                            parse_machine)
from castor.sim import (Configuration, RunKind, UndefinedTransitionError,
                        run_from, simulate, start_config, step, trace)

CHAMPION_2 = "0RB0RZ_1LA0RZ"
CANDIDATE_6 = "1RB1RA_1LB1LC_1RD0RE_0LE0RA_0RZ0RF_0RB0RC"


class TestStep:
    def test_first_step_of_two_state_champion(self):
        config = step(start_config(), parse_machine(CHAMPION_2))
        assert config.head == 1
        assert config.state == 1
        assert config.is_blank()
        assert config.steps == 1

    def test_candidate_sweeps_right_over_ones(self):
        # State A reading a one rewrites it and keeps moving right.
        table = parse_machine(CANDIDATE_6)
        config = Configuration(tape={0: 1, 1: 1}, head=0, state=0, hi=1)
        nxt = step(config, table)
        assert nxt.tape == {0: 1, 1: 1}
        assert nxt.head == 1
        assert nxt.state == 0

    def test_undefined_is_a_value(self):
        table = parse_machine("1RB---_------")
        config = Configuration(tape={0: 1}, head=0, state=0, hi=0)
        assert step(config, table) is None

    def test_halted_step_rejected(self):
        config = Configuration(state=HALT)
        with pytest.raises(ValueError):
            step(config, parse_machine(CHAMPION_2))

    def test_does_not_mutate_input(self):
        config = start_config()
        step(config, parse_machine(CHAMPION_2))
        assert config == start_config()


class TestSimulate:
    @pytest.mark.parametrize("text,steps", [
        ("0RZ0RZ", 1),
        (CHAMPION_2, 4),
        ("1RB0RB_1RC0LC_1LA0RZ", 12),
        ("1RB1LB_1LA0LC_0RZ0LD_1RD0LB", 34),
    ])
    def test_blank_halts(self, text, steps):
        result = simulate(parse_machine(text), 1000)
        assert result.kind is RunKind.HALTED_BLANK
        assert result.steps == steps

    def test_six_state_candidate(self):
        result = simulate(parse_machine(CANDIDATE_6), 500_000)
        assert result.kind is RunKind.HALTED_BLANK
        assert result.steps == 438_120

    def test_dirty_halt(self):
        result = simulate(parse_machine("1RZ---"), 10)
        assert result.kind is RunKind.HALTED_DIRTY
        assert result.steps == 1

    def test_cutoff(self):
        result = simulate(parse_machine(CHAMPION_2), 3)
        assert result.kind is RunKind.CUTOFF
        assert result.steps == 3

    def test_undefined_trajectory_raises(self):
        with pytest.raises(UndefinedTransitionError):
            simulate(parse_machine("1RB---_------"), 10)

    def test_determinism(self):
        table = parse_machine(CANDIDATE_6)
        assert simulate(table, 10_000) == simulate(table, 10_000)


def _random_table(rng: random.Random, n: int, m: int) -> TransitionTable:
    entries = []
    for _ in range(n * m):
        entries.append(Transition(rng.randrange(m),
                                  rng.choice((LEFT, RIGHT)),
                                  rng.choice(list(range(n)) + [HALT])))
    return TransitionTable(n, m, entries)


class TestStepSimulateAgreement:
    def test_fast_loop_matches_reference_step(self):
        rng = random.Random(20250811)
        for _ in range(200):
            n = rng.randint(1, 3)
            m = rng.randint(2, 3)
            table = _random_table(rng, n, m)
            cap = 300
            config = start_config()
            while config.state != HALT and config.steps < cap:
                config = step(config, table)
            fast = run_from(table, start_config(), cap)
            assert (config.state, config.steps, config.head, config.tape) == \
                (fast.state, fast.steps, fast.head, fast.tape)
            result = simulate(table, cap)
            assert result.steps == config.steps
            if config.state == HALT:
                expected = (RunKind.HALTED_BLANK if not config.tape
                            else RunKind.HALTED_DIRTY)
                assert result.kind is expected


class TestTapeInvariants:
    def test_only_nonblank_cells_stored(self):
        table = parse_machine(CHAMPION_2)
        config = start_config()
        while config.state != HALT:
            config = step(config, table)
            assert all(v != 0 for v in config.tape.values())
            assert config.lo <= config.head <= config.hi

    def test_blank_halt_means_empty_window(self):
        table = parse_machine(CHAMPION_2)
        end = run_from(table, start_config(), 100)
        assert end.state == HALT
        assert end.window() == (0,) * (end.hi - end.lo + 1)


class TestTrace:
    def test_two_state_champion_trace(self):
        rows = list(trace(parse_machine(CHAMPION_2), 100))
        assert rows == [
            (1, 0, 0, 0, 0),
            (2, 1, 1, 0, 1),
            (3, 0, 0, 0, 0),
            (4, 1, 1, 1, 0),
        ]
