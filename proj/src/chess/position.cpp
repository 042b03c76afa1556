#include "debate/chess.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

#include "debate/errors.hpp"
#include "debate/util.hpp"

namespace debate::chess {
namespace {

constexpr int file_of(Square sq) { return sq & 7; }
constexpr int rank_of(Square sq) { return sq >> 3; }
constexpr Square make_square(int file, int rank) { return rank * 8 + file; }
constexpr bool on_board(int file, int rank) { return file >= 0 && file < 8 && rank >= 0 && rank < 8; }

constexpr int kKnightSteps[8][2] = {{1, 2}, {2, 1}, {2, -1}, {1, -2}, {-1, -2}, {-2, -1}, {-2, 1}, {-1, 2}};
constexpr int kKingSteps[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
constexpr int kRookDirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
constexpr int kBishopDirs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

char piece_letter(PieceType t) {
    switch (t) {
        case PieceType::pawn: return 'P';
        case PieceType::knight: return 'N';
        case PieceType::bishop: return 'B';
        case PieceType::rook: return 'R';
        case PieceType::queen: return 'Q';
        case PieceType::king: return 'K';
        default: return '?';
    }
}

std::optional<PieceType> piece_from_letter(char c) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
        case 'P': return PieceType::pawn;
        case 'N': return PieceType::knight;
        case 'B': return PieceType::bishop;
        case 'R': return PieceType::rook;
        case 'Q': return PieceType::queen;
        case 'K': return PieceType::king;
        default: return std::nullopt;
    }
}

std::uint8_t rights_lost_at(Square sq) {
    switch (sq) {
        case 0: return kWhiteQueenside;
        case 7: return kWhiteKingside;
        case 4: return kWhiteKingside | kWhiteQueenside;
        case 56: return kBlackQueenside;
        case 63: return kBlackKingside;
        case 60: return kBlackKingside | kBlackQueenside;
        default: return 0;
    }
}

}  // namespace

std::string square_name(Square sq) {
    return {static_cast<char>('a' + file_of(sq)), static_cast<char>('1' + rank_of(sq))};
}

std::optional<Square> parse_square(std::string_view s) {
    if (s.size() != 2) return std::nullopt;
    if (s[0] < 'a' || s[0] > 'h' || s[1] < '1' || s[1] > '8') return std::nullopt;
    return make_square(s[0] - 'a', s[1] - '1');
}

std::string to_uci(const Move& m) {
    std::string out = square_name(m.from) + square_name(m.to);
    if (m.promotion != PieceType::none) {
        out.push_back(static_cast<char>(std::tolower(piece_letter(m.promotion))));
    }
    return out;
}

Position Position::startpos() {
    return from_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1");
}

Position Position::from_fen(std::string_view fen) {
    std::istringstream in{std::string(fen)};
    std::string placement, side, castling = "-", ep = "-";
    int halfmove = 0, fullmove = 1;
    if (!(in >> placement >> side)) throw ParseError("FEN: missing fields: " + std::string(fen));
    in >> castling >> ep;
    if (!(in >> halfmove)) halfmove = 0;
    if (!(in >> fullmove)) fullmove = 1;

    Position p;
    int rank = 7, file = 0;
    for (char c : placement) {
        if (c == '/') {
            if (file != 8) throw ParseError("FEN: short rank: " + std::string(fen));
            --rank;
            file = 0;
        } else if (c >= '1' && c <= '8') {
            file += c - '0';
        } else {
            auto t = piece_from_letter(c);
            if (!t || !on_board(file, rank)) throw ParseError("FEN: bad placement: " + std::string(fen));
            p.board_[static_cast<std::size_t>(make_square(file, rank))] =
                Piece{*t, std::isupper(static_cast<unsigned char>(c)) ? Color::white : Color::black};
            ++file;
        }
        if (file > 8) throw ParseError("FEN: long rank: " + std::string(fen));
    }
    if (rank != 0 || file != 8) throw ParseError("FEN: bad placement: " + std::string(fen));

    if (side == "w") p.side_ = Color::white;
    else if (side == "b") p.side_ = Color::black;
    else throw ParseError("FEN: bad side to move: " + std::string(fen));

    if (castling != "-") {
        for (char c : castling) {
            switch (c) {
                case 'K': p.castling_ |= kWhiteKingside; break;
                case 'Q': p.castling_ |= kWhiteQueenside; break;
                case 'k': p.castling_ |= kBlackKingside; break;
                case 'q': p.castling_ |= kBlackQueenside; break;
                default: throw ParseError("FEN: bad castling field: " + std::string(fen));
            }
        }
    }
    if (ep != "-") {
        auto sq = parse_square(ep);
        if (!sq) throw ParseError("FEN: bad en passant square: " + std::string(fen));
        p.ep_ = *sq;
    }
    p.halfmove_ = halfmove;
    p.fullmove_ = fullmove;
    return p;
}

std::string Position::fen() const {
    std::string out;
    for (int rank = 7; rank >= 0; --rank) {
        int empty = 0;
        for (int file = 0; file < 8; ++file) {
            Piece pc = at(make_square(file, rank));
            if (pc.empty()) {
                ++empty;
                continue;
            }
            if (empty) out += std::to_string(empty);
            empty = 0;
            char l = piece_letter(pc.type);
            out.push_back(pc.color == Color::white ? l : static_cast<char>(std::tolower(l)));
        }
        if (empty) out += std::to_string(empty);
        if (rank) out.push_back('/');
    }
    out += side_ == Color::white ? " w " : " b ";
    std::string c;
    if (castling_ & kWhiteKingside) c += 'K';
    if (castling_ & kWhiteQueenside) c += 'Q';
    if (castling_ & kBlackKingside) c += 'k';
    if (castling_ & kBlackQueenside) c += 'q';
    out += c.empty() ? "-" : c;
    out += ' ';
    out += ep_ ? square_name(*ep_) : "-";
    out += ' ' + std::to_string(halfmove_) + ' ' + std::to_string(fullmove_);
    return out;
}

Square Position::king_square(Color c) const {
    for (Square sq = 0; sq < 64; ++sq) {
        if (board_[static_cast<std::size_t>(sq)] == Piece{PieceType::king, c}) return sq;
    }
    return -1;
}

bool Position::is_attacked(Square sq, Color by) const {
    const int f = file_of(sq), r = rank_of(sq);
    // pawns attack diagonally forward from their own side
    const int pawn_rank = by == Color::white ? r - 1 : r + 1;
    for (int df : {-1, 1}) {
        if (on_board(f + df, pawn_rank) && at(make_square(f + df, pawn_rank)) == Piece{PieceType::pawn, by}) {
            return true;
        }
    }
    for (auto& s : kKnightSteps) {
        if (on_board(f + s[0], r + s[1]) &&
            at(make_square(f + s[0], r + s[1])) == Piece{PieceType::knight, by})
            return true;
    }
    for (auto& s : kKingSteps) {
        if (on_board(f + s[0], r + s[1]) && at(make_square(f + s[0], r + s[1])) == Piece{PieceType::king, by})
            return true;
    }
    auto slide = [&](const int (&dirs)[4][2], PieceType a, PieceType b) {
        for (auto& d : dirs) {
            int nf = f + d[0], nr = r + d[1];
            while (on_board(nf, nr)) {
                Piece pc = at(make_square(nf, nr));
                if (!pc.empty()) {
                    if (pc.color == by && (pc.type == a || pc.type == b)) return true;
                    break;
                }
                nf += d[0];
                nr += d[1];
            }
        }
        return false;
    };
    return slide(kRookDirs, PieceType::rook, PieceType::queen) ||
           slide(kBishopDirs, PieceType::bishop, PieceType::queen);
}

bool Position::in_check() const {
    Square k = king_square(side_);
    return k >= 0 && is_attacked(k, opposite(side_));
}

void Position::generate_pseudo(std::vector<Move>& out) const {
    const Color us = side_, them = opposite(side_);
    for (Square from = 0; from < 64; ++from) {
        Piece pc = at(from);
        if (pc.empty() || pc.color != us) continue;
        const int f = file_of(from), r = rank_of(from);

        auto add = [&](Square to, bool capture) { out.push_back(Move{from, to, PieceType::none, capture}); };

        switch (pc.type) {
            case PieceType::pawn: {
                const int dir = us == Color::white ? 1 : -1;
                const int start_rank = us == Color::white ? 1 : 6;
                const int promo_rank = us == Color::white ? 7 : 0;
                auto add_pawn = [&](Square to, bool capture, bool ep) {
                    if (rank_of(to) == promo_rank) {
                        for (auto t : {PieceType::queen, PieceType::rook, PieceType::bishop, PieceType::knight}) {
                            out.push_back(Move{from, to, t, capture});
                        }
                    } else {
                        out.push_back(Move{from, to, PieceType::none, capture, ep});
                    }
                };
                if (on_board(f, r + dir) && at(make_square(f, r + dir)).empty()) {
                    add_pawn(make_square(f, r + dir), false, false);
                    if (r == start_rank && at(make_square(f, r + 2 * dir)).empty()) {
                        add(make_square(f, r + 2 * dir), false);
                    }
                }
                for (int df : {-1, 1}) {
                    if (!on_board(f + df, r + dir)) continue;
                    Square to = make_square(f + df, r + dir);
                    Piece target = at(to);
                    if (!target.empty() && target.color == them) add_pawn(to, true, false);
                    else if (ep_ && *ep_ == to) add_pawn(to, true, true);
                }
                break;
            }
            case PieceType::knight:
            case PieceType::king: {
                const auto& steps = pc.type == PieceType::knight ? kKnightSteps : kKingSteps;
                for (auto& s : steps) {
                    if (!on_board(f + s[0], r + s[1])) continue;
                    Square to = make_square(f + s[0], r + s[1]);
                    Piece target = at(to);
                    if (target.empty()) add(to, false);
                    else if (target.color == them) add(to, true);
                }
                if (pc.type == PieceType::king) {
                    const int home = us == Color::white ? 0 : 56;
                    const auto ks = us == Color::white ? kWhiteKingside : kBlackKingside;
                    const auto qs = us == Color::white ? kWhiteQueenside : kBlackQueenside;
                    if (from == home + 4 && !is_attacked(from, them)) {
                        if ((castling_ & ks) && at(home + 5).empty() && at(home + 6).empty() &&
                            at(home + 7) == Piece{PieceType::rook, us} && !is_attacked(home + 5, them) &&
                            !is_attacked(home + 6, them)) {
                            out.push_back(Move{from, home + 6, PieceType::none, false, false, true});
                        }
                        if ((castling_ & qs) && at(home + 3).empty() && at(home + 2).empty() &&
                            at(home + 1).empty() && at(home) == Piece{PieceType::rook, us} &&
                            !is_attacked(home + 3, them) && !is_attacked(home + 2, them)) {
                            out.push_back(Move{from, home + 2, PieceType::none, false, false, true});
                        }
                    }
                }
                break;
            }
            case PieceType::bishop:
            case PieceType::rook:
            case PieceType::queen: {
                auto slide = [&](const int (&dirs)[4][2]) {
                    for (auto& d : dirs) {
                        int nf = f + d[0], nr = r + d[1];
                        while (on_board(nf, nr)) {
                            Square to = make_square(nf, nr);
                            Piece target = at(to);
                            if (target.empty()) {
                                add(to, false);
                            } else {
                                if (target.color == them) add(to, true);
                                break;
                            }
                            nf += d[0];
                            nr += d[1];
                        }
                    }
                };
                if (pc.type != PieceType::bishop) slide(kRookDirs);
                if (pc.type != PieceType::rook) slide(kBishopDirs);
                break;
            }
            default:
                break;
        }
    }
}

std::vector<Move> Position::legal_moves() const {
    std::vector<Move> pseudo;
    pseudo.reserve(64);
    generate_pseudo(pseudo);
    std::vector<Move> legal;
    legal.reserve(pseudo.size());
    for (const auto& m : pseudo) {
        Position next = after(m);
        Square k = next.king_square(side_);
        if (k >= 0 && !next.is_attacked(k, next.side_)) legal.push_back(m);
    }
    return legal;
}

Position Position::after(const Move& m) const {
    Position p = *this;
    Piece moving = at(m.from);
    auto& b = p.board_;
    const bool pawn_move = moving.type == PieceType::pawn;

    b[static_cast<std::size_t>(m.from)] = Piece{};
    if (m.en_passant) {
        Square victim = make_square(file_of(m.to), rank_of(m.from));
        b[static_cast<std::size_t>(victim)] = Piece{};
    }
    b[static_cast<std::size_t>(m.to)] =
        m.promotion != PieceType::none ? Piece{m.promotion, moving.color} : moving;
    if (m.castle) {
        const int home = rank_of(m.from) * 8;
        if (file_of(m.to) == 6) {
            b[static_cast<std::size_t>(home + 5)] = b[static_cast<std::size_t>(home + 7)];
            b[static_cast<std::size_t>(home + 7)] = Piece{};
        } else {
            b[static_cast<std::size_t>(home + 3)] = b[static_cast<std::size_t>(home)];
            b[static_cast<std::size_t>(home)] = Piece{};
        }
    }
    p.castling_ &= static_cast<std::uint8_t>(~(rights_lost_at(m.from) | rights_lost_at(m.to)));
    p.ep_.reset();
    if (pawn_move && std::abs(rank_of(m.to) - rank_of(m.from)) == 2) {
        p.ep_ = make_square(file_of(m.from), (rank_of(m.from) + rank_of(m.to)) / 2);
    }
    p.halfmove_ = (pawn_move || m.capture) ? 0 : halfmove_ + 1;
    if (side_ == Color::black) ++p.fullmove_;
    p.side_ = opposite(side_);
    return p;
}

std::string Position::to_san(const Move& m) const {
    std::string san;
    Piece pc = at(m.from);
    if (m.castle) {
        san = file_of(m.to) == 6 ? "O-O" : "O-O-O";
    } else if (pc.type == PieceType::pawn) {
        if (m.capture) {
            san.push_back(static_cast<char>('a' + file_of(m.from)));
            san.push_back('x');
        }
        san += square_name(m.to);
        if (m.promotion != PieceType::none) {
            san.push_back('=');
            san.push_back(piece_letter(m.promotion));
        }
    } else {
        san.push_back(piece_letter(pc.type));
        bool ambiguous = false, same_file = false, same_rank = false;
        for (const auto& other : legal_moves()) {
            if (other.to != m.to || other.from == m.from || at(other.from).type != pc.type) continue;
            ambiguous = true;
            if (file_of(other.from) == file_of(m.from)) same_file = true;
            if (rank_of(other.from) == rank_of(m.from)) same_rank = true;
        }
        if (ambiguous) {
            if (!same_file) san.push_back(static_cast<char>('a' + file_of(m.from)));
            else if (!same_rank) san.push_back(static_cast<char>('1' + rank_of(m.from)));
            else san += square_name(m.from);
        }
        if (m.capture) san.push_back('x');
        san += square_name(m.to);
    }
    Position next = after(m);
    if (next.in_check()) san.push_back(next.legal_moves().empty() ? '#' : '+');
    return san;
}

std::optional<Move> Position::parse_san(std::string_view raw) const {
    std::string s = trim(raw);
    while (!s.empty() && std::string_view("+#!?").find(s.back()) != std::string_view::npos) s.pop_back();
    if (s == "0-0" || s == "O-O" || s == "o-o") s = "O-O";
    if (s == "0-0-0" || s == "O-O-O" || s == "o-o-o") s = "O-O-O";
    const auto moves = legal_moves();
    if (s == "O-O" || s == "O-O-O") {
        for (const auto& m : moves) {
            if (m.castle && (file_of(m.to) == 6) == (s == "O-O")) return m;
        }
        return std::nullopt;
    }
    static const std::regex kSan(R"(^([KQRBN])?([a-h])?([1-8])?(x|:)?([a-h][1-8])(?:=?([QRBNqrbn]))?$)");
    std::smatch mt;
    if (!std::regex_match(s, mt, kSan)) return std::nullopt;
    const PieceType type = mt[1].matched ? *piece_from_letter(mt[1].str()[0]) : PieceType::pawn;
    const int from_file = mt[2].matched ? mt[2].str()[0] - 'a' : -1;
    const int from_rank = mt[3].matched ? mt[3].str()[0] - '1' : -1;
    const bool says_capture = mt[4].matched;
    const Square to = *parse_square(mt[5].str());
    const PieceType promo = mt[6].matched ? *piece_from_letter(mt[6].str()[0]) : PieceType::none;
    // a bare "b" followed by a square is a pawn move; "B" is a bishop
    std::optional<Move> found;
    for (const auto& m : moves) {
        if (m.to != to || at(m.from).type != type || m.castle) continue;
        if (from_file >= 0 && file_of(m.from) != from_file) continue;
        if (from_rank >= 0 && rank_of(m.from) != from_rank) continue;
        if (m.promotion != promo) continue;
        if (says_capture && !m.capture) continue;
        if (found) return std::nullopt;  // still ambiguous
        found = m;
    }
    return found;
}

std::optional<Move> Position::parse_uci(std::string_view uci) const {
    if (uci.size() < 4 || uci.size() > 5) return std::nullopt;
    auto from = parse_square(uci.substr(0, 2));
    auto to = parse_square(uci.substr(2, 2));
    if (!from || !to) return std::nullopt;
    PieceType promo = PieceType::none;
    if (uci.size() == 5) {
        auto t = piece_from_letter(uci[4]);
        if (!t || *t == PieceType::pawn || *t == PieceType::king) return std::nullopt;
        promo = *t;
    }
    for (const auto& m : legal_moves()) {
        if (m.from == *from && m.to == *to && m.promotion == promo) return m;
    }
    return std::nullopt;
}

std::uint64_t perft(const Position& pos, int depth) {
    if (depth <= 0) return 1;
    auto moves = pos.legal_moves();
    if (depth == 1) return moves.size();
    std::uint64_t n = 0;
    for (const auto& m : moves) n += perft(pos.after(m), depth - 1);
    return n;
}

std::vector<std::string> destinations(const Position& pos, Square from) {
    std::vector<std::string> out;
    for (const auto& m : pos.legal_moves()) {
        if (m.from != from) continue;
        auto name = square_name(m.to);
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Position replay_san(const std::vector<std::string>& san_moves, std::vector<std::string>* uci_out) {
    Position pos = Position::startpos();
    for (std::size_t i = 0; i < san_moves.size(); ++i) {
        auto m = pos.parse_san(san_moves[i]);
        if (!m) {
            throw IllegalMove("move " + std::to_string(i / 2 + 1) + (i % 2 ? "..." : ".") + " '" +
                              san_moves[i] + "' is not legal in " + pos.fen());
        }
        if (uci_out) uci_out->push_back(to_uci(*m));
        pos = pos.after(*m);
    }
    return pos;
}

Position replay_uci(std::string_view moves) {
    Position pos = Position::startpos();
    std::istringstream in{std::string(moves)};
    std::string tok;
    while (in >> tok) {
        auto m = pos.parse_uci(tok);
        if (!m) throw IllegalMove("move '" + tok + "' is not legal in " + pos.fen());
        pos = pos.after(*m);
    }
    return pos;
}

std::string movetext(const std::vector<std::string>& san_moves) {
    std::string out;
    for (std::size_t i = 0; i < san_moves.size(); ++i) {
        if (i % 2 == 0) {
            if (i) out.push_back(' ');
            out += std::to_string(i / 2 + 1) + ". ";
        } else {
            out.push_back(' ');
        }
        out += san_moves[i];
    }
    return out;
}

LegalityResult check_move_legality(const std::vector<std::string>& prefix_san, std::string_view move) {
    Position pos;
    try {
        pos = replay_san(prefix_san);
    } catch (const IllegalMove& e) {
        throw PgnParseError(std::string("prefix not replayable: ") + e.what());
    }
    LegalityResult r;
    auto m = pos.parse_san(move);
    if (!m) return r;
    r.legal = true;
    r.san = pos.to_san(*m);
    r.uci = to_uci(*m);
    r.position = pos.after(*m);
    return r;
}

}  // namespace debate::chess
