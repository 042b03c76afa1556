#!/usr/bin/env python3
"""Regenerates tests/fixtures/games.pgn from seeded random play.

Requires python-chess. Only used to build fixtures; the library does not
depend on it.
"""
import io
import random
import sys
from pathlib import Path

import chess
import chess.pgn

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
OUT = FIXTURES / "games.pgn"


def random_game(rng, plies):
    board = chess.Board()
    moves = []
    for _ in range(plies):
        legal = list(board.legal_moves)
        if not legal:
            break
        # Prefer captures and developing moves a little so positions stay lively.
        weights = [3 if board.is_capture(m) else 1 for m in legal]
        m = rng.choices(legal, weights)[0]
        moves.append(m)
        board.push(m)
    return moves, board


def hangs_queen(board):
    """A White queen move to a square attacked by a black pawn, if any."""
    for m in board.legal_moves:
        if board.piece_type_at(m.from_square) != chess.QUEEN:
            continue
        after = board.copy()
        after.push(m)
        attackers = after.attackers(chess.BLACK, m.to_square)
        if any(after.piece_type_at(a) == chess.PAWN for a in attackers) and not after.is_check():
            return m
    return None


def to_pgn(moves, tags, comments=False):
    game = chess.pgn.Game()
    for k, v in tags.items():
        game.headers[k] = v
    node = game
    for i, m in enumerate(moves):
        node = node.add_variation(m)
        if comments and i == 3:
            node.comment = "a quiet move"
            node.nags.add(chess.pgn.NAG_GOOD_MOVE)
    exporter = chess.pgn.StringExporter(headers=True, variations=True, comments=True)
    return game.accept(exporter)


def validity_records(rng, n):
    out = []
    while len(out) < n:
        moves, board = random_game(rng, rng.randint(4, 30))
        if board.is_game_over():
            continue
        by_square = {}
        for m in board.legal_moves:
            by_square.setdefault(m.from_square, set()).add(chess.square_name(m.to_square))
        sq = rng.choice(sorted(by_square))
        out.append({"moves": " ".join(m.uci() for m in moves), "square": chess.square_name(sq),
                    "valid": sorted(by_square[sq])})
    return out


def write_validity(rng):
    import json
    recs = validity_records(rng, 12)
    (FIXTURES / "chess_validity.jsonl").write_text("".join(json.dumps(r) + "\n" for r in recs[:8]))
    task = {"name": "chess_state_tracking_synthetic_short_fixture",
            "examples": [{"input": (r["moves"] + " " + r["square"]).strip(), "target": r["valid"]} for r in recs[8:]]}
    (FIXTURES / "chess_validity_task.json").write_text(json.dumps(task, indent=2) + "\n")


def main():
    rng = random.Random(2023)
    games = []
    blunder = None
    n = 0
    while len(games) < 5:
        moves, _ = random_game(rng, 60)
        if len(moves) < 40:
            continue
        prefix = chess.Board()
        for m in moves[:26]:
            prefix.push(m)
        q = hangs_queen(prefix)
        if len(games) == 0 and q is None:
            continue
        if len(games) == 0:
            blunder = prefix.san(q)
        n += 1
        games.append(to_pgn(moves, {"Event": f"Fixture {n}", "Site": "?", "Date": "2023.01.0%d" % n,
                                    "Round": str(n), "White": f"White {n}", "Black": f"Black {n}",
                                    "Result": "*"}, comments=(n == 2)))
    short, _ = random_game(rng, 20)
    games.append(to_pgn(short, {"Event": "Short", "White": "A", "Black": "B", "Result": "*"}))
    setup = chess.Board("4k3/8/8/8/8/8/4P3/4K3 w - - 0 1")
    setup_moves = []
    for _ in range(30):
        legal = list(setup.legal_moves)
        if not legal:
            break
        m = rng.choice(legal)
        setup_moves.append(m)
        setup.push(m)
    g = chess.pgn.Game()
    g.setup(chess.Board("4k3/8/8/8/8/8/4P3/4K3 w - - 0 1"))
    g.headers["Event"] = "From position"
    node = g
    for m in setup_moves:
        node = node.add_variation(m)
    games.append(str(g))
    OUT.write_text("\n\n".join(games) + "\n")
    write_validity(random.Random(7))
    print(f"wrote {OUT}; queen-hanging move in game 1 at move 14: {blunder}", file=sys.stderr)


if __name__ == "__main__":
    main()
