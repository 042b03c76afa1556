#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace debate::chess {

enum class Color : std::uint8_t { white = 0, black = 1 };
enum class PieceType : std::uint8_t { none = 0, pawn, knight, bishop, rook, queen, king };

constexpr Color opposite(Color c) { return c == Color::white ? Color::black : Color::white; }

/// 0 = a1, 7 = h1, 63 = h8.
using Square = int;

std::string square_name(Square sq);
std::optional<Square> parse_square(std::string_view s);

struct Piece {
    PieceType type = PieceType::none;
    Color color = Color::white;

    bool empty() const { return type == PieceType::none; }
    friend bool operator==(const Piece&, const Piece&) = default;
};

struct Move {
    Square from = 0;
    Square to = 0;
    PieceType promotion = PieceType::none;
    bool capture = false;
    bool en_passant = false;
    bool castle = false;

    friend bool operator==(const Move&, const Move&) = default;
};

/// Long algebraic form used by UCI engines: "e2e4", "e7e8q".
std::string to_uci(const Move& m);

enum CastlingRight : std::uint8_t {
    kWhiteKingside = 1,
    kWhiteQueenside = 2,
    kBlackKingside = 4,
    kBlackQueenside = 8,
};

class Position {
public:
    static Position startpos();
    /// Throws ParseError on malformed FEN.
    static Position from_fen(std::string_view fen);

    std::string fen() const;

    Piece at(Square sq) const { return board_[static_cast<std::size_t>(sq)]; }
    Color side_to_move() const { return side_; }
    int fullmove() const { return fullmove_; }

    std::vector<Move> legal_moves() const;
    bool in_check() const;
    bool is_attacked(Square sq, Color by) const;

    /// Applies a move known to be legal; returns the successor position.
    Position after(const Move& m) const;

    /// SAN including "+"/"#" suffixes.
    std::string to_san(const Move& m) const;
    /// Accepts standard SAN plus common informal variants: missing capture
    /// mark, redundant disambiguation, "0-0", trailing "+#!?", "e8Q".
    std::optional<Move> parse_san(std::string_view san) const;
    std::optional<Move> parse_uci(std::string_view uci) const;

private:
    void generate_pseudo(std::vector<Move>& out) const;
    Square king_square(Color c) const;

    std::array<Piece, 64> board_{};
    Color side_ = Color::white;
    std::uint8_t castling_ = 0;
    std::optional<Square> ep_;
    int halfmove_ = 0;
    int fullmove_ = 1;
};

std::uint64_t perft(const Position& pos, int depth);

/// Legal destination squares of the piece standing on `from`.
std::vector<std::string> destinations(const Position& pos, Square from);

struct PgnGame {
    std::map<std::string, std::string> tags;
    std::vector<std::string> san_moves;
    std::string result;
    std::size_t line = 0;
};

/// PGN import format: tag pairs, movetext with move numbers, comments,
/// nested variations, NAGs and result markers. Throws PgnParseError.
std::vector<PgnGame> parse_pgn(std::string_view text, const std::string& source_name = "<pgn>");

/// Replays SAN moves from the standard start position. Throws IllegalMove
/// naming the first move that cannot be played.
Position replay_san(const std::vector<std::string>& san_moves, std::vector<std::string>* uci_out = nullptr);

/// Replays space-separated UCI moves (the BIG-bench chess state notation).
Position replay_uci(std::string_view moves);

/// "1. e4 e5 2. Nf3 ..." rendering of a SAN move list.
std::string movetext(const std::vector<std::string>& san_moves);

struct LegalityResult {
    bool legal = false;
    std::optional<Position> position;
    std::string uci;
    std::string san;
};

/// Legality of `move` (SAN) after the SAN prefix. Throws PgnParseError if the
/// prefix itself cannot be replayed.
LegalityResult check_move_legality(const std::vector<std::string>& prefix_san, std::string_view move);

}  // namespace debate::chess
