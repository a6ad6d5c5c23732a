"""Random AgentScript program generator for the semantic corpora.

Programs are total by construction: every operation is defined on the types
it receives, list indexing uses literal indices within tracked lengths,
loops run over bounded lists, and names are always bound before use. Two
modes:

* straight mode: assignments and sink calls only, with influence-preserving
  string operations (concatenation, interpolation, literal-keyed containers).
  On these programs taint tracking is exact, not just sound.
* branchy mode: adds integers, booleans, comparisons, and/or, if/else, for
  loops, and tool outputs fed back through ``sink.echo`` — the flows where
  only soundness (disclosure ⊇ influence) is promised.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

SOURCE_KEYS = ("k1", "k2", "k3")


@dataclass
class GenState:
    strs: list[str] = field(default_factory=list)
    ints: list[str] = field(default_factory=list)
    bools: list[str] = field(default_factory=list)
    lists: dict[str, int | None] = field(default_factory=dict)  # name -> known len
    counter: int = 0

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def snapshot(self):
        return (
            list(self.strs), list(self.ints), list(self.bools), dict(self.lists),
        )

    def restore(self, snap) -> None:
        self.strs, self.ints, self.bools, lists = (
            list(snap[0]), list(snap[1]), list(snap[2]), dict(snap[3]),
        )
        self.lists = lists


class ProgramGen:
    def __init__(self, rng: random.Random, n_sources: int, max_stmts: int,
                 branchy: bool):
        self.rng = rng
        self.n_sources = n_sources
        self.max_stmts = max_stmts
        self.branchy = branchy

    def generate(self) -> str:
        state = GenState()
        lines = ['sink = mcp_helper.connect("sink")']
        for i in range(self.n_sources):
            var = f"s{i + 1}"
            lines.append(f'{var} = priv_data_db.get("{SOURCE_KEYS[i]}")')
            state.strs.append(var)
        lines.append('seed = "seed-text"')
        state.strs.append("seed")

        budget = self.rng.randint(1, self.max_stmts)
        body = self._stmts(state, budget, depth=0, in_branch=False)
        # ensure at least one sink observation
        if not any("process_query" in line for line in body):
            body.append(self._sink_call(state))
        return "\n".join(lines + body) + "\n"

    # ------------------------------------------------------------------

    def _stmts(self, state: GenState, budget: int, depth: int, in_branch: bool) -> list[str]:
        lines: list[str] = []
        while budget > 0:
            budget -= 1
            roll = self.rng.random()
            if self.branchy and depth < 2 and roll < 0.14 and state.bools:
                lines.extend(self._if_stmt(state, depth))
            elif self.branchy and depth < 2 and roll < 0.22 and state.lists:
                lines.extend(self._for_stmt(state, depth))
            elif roll < 0.5:
                lines.append(self._assign(state, in_branch))
            elif roll < 0.72:
                lines.append(self._container_stmt(state, in_branch))
            elif self.branchy and roll < 0.8:
                lines.append(self._branchy_assign(state, in_branch))
            elif self.branchy and roll < 0.86 and state.strs:
                lines.append(self._echo_stmt(state, in_branch))
            else:
                lines.append(self._sink_call(state))
        return lines

    # ------------------------------------------------------------------
    # Expressions

    def _str_expr(self, state: GenState, depth: int = 2) -> str:
        options = ["var", "lit"]
        if depth > 0:
            options += ["concat", "interp"]
            if state.lists:
                options.append("index")
        kind = self.rng.choice(options)
        if kind == "var" and state.strs:
            return self.rng.choice(state.strs)
        if kind == "concat" and state.strs:
            return f"{self._str_expr(state, depth - 1)} + {self._str_expr(state, depth - 1)}"
        if kind == "interp" and state.strs:
            a = self._str_expr(state, depth - 1)
            b = self._str_expr(state, depth - 1)
            return f'f"<{{{a}}}|{{{b}}}>"'
        if kind == "index":
            name, length = self.rng.choice(
                [(n, l) for n, l in state.lists.items() if l] or [(None, None)]
            )
            if name is not None:
                return f"{name}[{self.rng.randrange(length)}]"
        return f'"t{self.rng.randint(0, 999)}"'

    def _int_expr(self, state: GenState, depth: int = 2) -> str:
        if depth > 0 and state.ints and self.rng.random() < 0.5:
            op = self.rng.choice(["+", "-", "*"])
            return (
                f"({self._int_expr(state, depth - 1)} {op} "
                f"{self._int_expr(state, depth - 1)})"
            )
        if state.ints and self.rng.random() < 0.5:
            return self.rng.choice(state.ints)
        return str(self.rng.randint(0, 50))

    def _bool_expr(self, state: GenState, depth: int = 2) -> str:
        roll = self.rng.random()
        if depth > 0 and roll < 0.3 and state.bools:
            op = self.rng.choice(["and", "or"])
            return (
                f"({self._bool_expr(state, depth - 1)} {op} "
                f"{self._bool_expr(state, depth - 1)})"
            )
        if depth > 0 and roll < 0.4 and state.bools:
            return f"not {self._bool_expr(state, depth - 1)}"
        if roll < 0.7 and state.strs:
            op = self.rng.choice(["==", "!=", "<", ">="])
            return f"{self._str_expr(state, 1)} {op} {self._str_expr(state, 1)}"
        if state.ints:
            op = self.rng.choice(["==", "<", "<=", ">"])
            return f"{self._int_expr(state, 1)} {op} {self._int_expr(state, 1)}"
        return self.rng.choice(["True", "False"])

    # ------------------------------------------------------------------
    # Statements

    def _assign(self, state: GenState, in_branch: bool) -> str:
        value = self._str_expr(state)
        if in_branch and state.strs and self.rng.random() < 0.5:
            name = self.rng.choice(state.strs)  # reassignment
        else:
            name = state.fresh("x")
            state.strs.append(name)
        return f"{name} = {value}"

    def _branchy_assign(self, state: GenState, in_branch: bool) -> str:
        if self.rng.random() < 0.5:
            value = self._int_expr(state)
            if in_branch and state.ints and self.rng.random() < 0.5:
                name = self.rng.choice(state.ints)
            else:
                name = state.fresh("i")
                state.ints.append(name)
            return f"{name} = {value}"
        value = self._bool_expr(state)
        if in_branch and state.bools and self.rng.random() < 0.5:
            name = self.rng.choice(state.bools)
        else:
            name = state.fresh("b")
            state.bools.append(name)
        return f"{name} = {value}"

    def _container_stmt(self, state: GenState, in_branch: bool) -> str:
        if self.rng.random() < 0.6 or not state.lists:
            items = [self._str_expr(state, 1) for _ in range(self.rng.randint(1, 3))]
            name = state.fresh("l")
            if not in_branch:
                state.lists[name] = len(items)
            return f"{name} = [{', '.join(items)}]"
        entries = ", ".join(
            f'"f{i}": {self._str_expr(state, 1)}' for i in range(self.rng.randint(1, 2))
        )
        name = state.fresh("m")
        map_name = state.fresh("x")
        state.strs.append(map_name)
        return f'{name} = {{{entries}}}\n{map_name} = {name}["f0"]'

    def _echo_stmt(self, state: GenState, in_branch: bool) -> str:
        payload = self._str_expr(state, 1)
        name = state.fresh("x")
        if not in_branch:
            state.strs.append(name)
        return f'{name} = sink.process_query("echo", args={{"x": {payload}}})'

    def _sink_call(self, state: GenState) -> str:
        n_args = self.rng.randint(1, 2)
        args = ", ".join(
            f'"{arg}": {self._str_expr(state)}'
            for arg in ("a", "b")[:n_args]
        )
        return f'sink.process_query("put", args={{{args}}})'

    def _if_stmt(self, state: GenState, depth: int) -> list[str]:
        cond = self._bool_expr(state)
        lines = [f"if {cond}:"]
        snap = state.snapshot()
        then_body = self._stmts(state, self.rng.randint(1, 3), depth + 1, in_branch=True)
        state.restore(snap)
        lines.extend(f"    {line}" for block in then_body for line in block.split("\n"))
        if self.rng.random() < 0.6:
            lines.append("else:")
            else_body = self._stmts(state, self.rng.randint(1, 2), depth + 1, in_branch=True)
            state.restore(snap)
            lines.extend(f"    {line}" for block in else_body for line in block.split("\n"))
        return lines

    def _for_stmt(self, state: GenState, depth: int) -> list[str]:
        collection = self.rng.choice(list(state.lists))
        var = state.fresh("e")
        snap = state.snapshot()
        state.strs.append(var)
        body = self._stmts(state, self.rng.randint(1, 3), depth + 1, in_branch=True)
        state.restore(snap)
        lines = [f"for {var} in {collection}:"]
        lines.extend(f"    {line}" for block in body for line in block.split("\n"))
        return lines


def generate_program(seed: int, n_sources: int = 3, max_stmts: int = 20,
                     branchy: bool = True) -> str:
    rng = random.Random(seed)
    n = rng.randint(1, n_sources)
    gen = ProgramGen(rng, n, max_stmts, branchy)
    return gen.generate()
