#include "typegraph/frontend/parser.hpp"

#include <cctype>
#include <map>
#include <memory>
#include <set>
#include <utility>

namespace typegraph {
namespace {

using namespace ast;

enum class Tok { Ident, Number, String, Punct, Eof };

struct Token {
    Tok kind;
    std::string text;
    Span span;
};

const std::set<std::string> kKeywords = {
    "class", "extends", "interface", "function", "let", "return",
    "if",    "else",    "while",     "true",     "false",
};

// Constructs we recognize but deliberately do not support. Reporting them by
// name beats a generic syntax error.
const std::set<std::string> kUnsupportedStarters = {
    "for",   "import", "export", "const", "var",       "switch", "do",    "try",
    "throw", "async",  "await",  "enum",  "namespace", "module", "yield", "type",
};

const std::set<std::string> kUnsupportedExprHeads = {
    "new", "this", "super", "typeof", "delete", "instanceof", "in", "await", "function",
};

class Lexer {
public:
    Lexer(std::string path, const std::string& text) : path_(std::move(path)), text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_ws();
            Span sp = here();
            if (pos_ >= text_.size()) {
                out.push_back({Tok::Eof, "", sp});
                break;
            }
            char c = text_[pos_];
            if (std::isalpha((unsigned char)c) || c == '_' || c == '$') {
                std::string s;
                while (pos_ < text_.size() &&
                       (std::isalnum((unsigned char)text_[pos_]) || text_[pos_] == '_' ||
                        text_[pos_] == '$'))
                    s += advance();
                out.push_back({Tok::Ident, s, close(sp)});
            } else if (std::isdigit((unsigned char)c)) {
                std::string s;
                while (pos_ < text_.size() &&
                       (std::isdigit((unsigned char)text_[pos_]) || text_[pos_] == '.'))
                    s += advance();
                out.push_back({Tok::Number, s, close(sp)});
            } else if (c == '"' || c == '\'') {
                char quote = advance();
                std::string s;
                while (pos_ < text_.size() && text_[pos_] != quote) {
                    char ch = advance();
                    if (ch == '\\' && pos_ < text_.size()) {
                        char e = advance();
                        switch (e) {
                            case 'n': s += '\n'; break;
                            case 't': s += '\t'; break;
                            default: s += e; break;
                        }
                    } else {
                        if (ch == '\n') throw SyntaxError(path_, sp.line, sp.col, "unterminated string");
                        s += ch;
                    }
                }
                if (pos_ >= text_.size())
                    throw SyntaxError(path_, sp.line, sp.col, "unterminated string");
                advance();  // closing quote
                out.push_back({Tok::String, s, close(sp)});
            } else {
                static const char* two[] = {"<=", ">=", "==", "!=", "&&", "||", "=>"};
                std::string s(1, c);
                if (pos_ + 1 < text_.size()) {
                    std::string pair = s + text_[pos_ + 1];
                    for (const char* t : two)
                        if (pair == t) s = pair;
                }
                for (std::size_t i = 0; i < s.size(); ++i) advance();
                static const std::string kSingles = "(){}[]<>.,;:=+-*/!";
                if (s.size() == 1 && kSingles.find(s[0]) == std::string::npos)
                    throw SyntaxError(path_, sp.line, sp.col, "unexpected character '" + s + "'");
                out.push_back({Tok::Punct, s, close(sp)});
            }
        }
        return out;
    }

private:
    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace((unsigned char)c)) {
                advance();
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
                Span sp = here();
                advance();
                advance();
                while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/'))
                    advance();
                if (pos_ + 1 >= text_.size())
                    throw SyntaxError(path_, sp.line, sp.col, "unterminated comment");
                advance();
                advance();
            } else {
                break;
            }
        }
    }

    Span here() const { return Span{line_, col_, line_, col_}; }
    Span close(Span sp) const {
        sp.end_line = line_;
        sp.end_col = col_;
        return sp;
    }

    std::string path_;
    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    Parser(std::string path, std::vector<Token> toks)
        : path_(std::move(path)), toks_(std::move(toks)) {}

    FileAst parse_file() {
        FileAst f;
        f.path = path_;
        while (!at_eof()) {
            if (at_ident("class") || at_ident("interface")) {
                f.classes.push_back(parse_class());
                f.order.emplace_back(FileAst::DeclKind::Class, f.classes.size() - 1);
            } else if (at_ident("function")) {
                f.functions.push_back(parse_function(true));
                f.order.emplace_back(FileAst::DeclKind::Function, f.functions.size() - 1);
            } else {
                f.statements.push_back(parse_stmt());
                f.order.emplace_back(FileAst::DeclKind::Statement, f.statements.size() - 1);
            }
        }
        return f;
    }

private:
    // -- token helpers --
    const Token& peek(std::size_t k = 0) const {
        std::size_t i = std::min(pos_ + k, toks_.size() - 1);
        return toks_[i];
    }
    bool at_eof() const { return peek().kind == Tok::Eof; }
    bool at_ident(const std::string& s) const {
        return peek().kind == Tok::Ident && peek().text == s;
    }
    bool at_punct(const std::string& s) const {
        return peek().kind == Tok::Punct && peek().text == s;
    }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    Token expect_punct(const std::string& s) {
        if (!at_punct(s)) fail("expected '" + s + "'");
        return next();
    }
    Token expect_kw(const std::string& s) {
        if (!at_ident(s)) fail("expected '" + s + "'");
        return next();
    }
    std::string expect_name(const char* what) {
        if (peek().kind != Tok::Ident) fail(std::string("expected ") + what);
        if (kUnsupportedStarters.count(peek().text) || kUnsupportedExprHeads.count(peek().text))
            throw UnsupportedConstruct(path_, peek().span, peek().text);
        return next().text;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        std::string got = t.kind == Tok::Eof ? "end of file" : "'" + t.text + "'";
        throw SyntaxError(path_, t.span.line, t.span.col, msg + ", found " + got);
    }
    void check_unsupported_starter() {
        if (peek().kind == Tok::Ident && kUnsupportedStarters.count(peek().text))
            throw UnsupportedConstruct(path_, peek().span, peek().text);
    }

    // -- declarations --
    ClassDecl parse_class() {
        ClassDecl c;
        c.span = peek().span;
        c.is_interface = at_ident("interface");
        next();  // class | interface
        c.name = expect_name("class name");
        if (at_ident("extends")) {
            next();
            c.superclass = expect_name("superclass name");
        }
        expect_punct("{");
        while (!at_punct("}")) {
            if (at_eof()) fail("expected '}'");
            Span msp = peek().span;
            std::string name = expect_name("member name");
            if (at_punct("(")) {
                FuncDecl m = parse_function_rest(name, msp, !c.is_interface);
                c.methods.push_back(std::move(m));
            } else {
                FieldDecl fd;
                fd.name = name;
                fd.span = msp;
                if (at_punct(":")) {
                    next();
                    fd.ann = parse_ann();
                }
                expect_punct(";");
                c.fields.push_back(std::move(fd));
            }
        }
        next();  // }
        return c;
    }

    FuncDecl parse_function(bool with_body) {
        Span sp = peek().span;
        expect_kw("function");
        std::string name = expect_name("function name");
        return parse_function_rest(name, sp, with_body);
    }

    FuncDecl parse_function_rest(std::string name, Span sp, bool with_body) {
        FuncDecl fn;
        fn.name = std::move(name);
        fn.span = sp;
        expect_punct("(");
        while (!at_punct(")")) {
            if (!fn.params.empty()) expect_punct(",");
            Param p;
            p.span = peek().span;
            p.name = expect_name("parameter name");
            if (at_punct(":")) {
                next();
                p.ann = parse_ann();
            }
            fn.params.push_back(std::move(p));
        }
        next();  // )
        if (at_punct(":")) {
            next();
            fn.ret_ann = parse_ann();
        }
        if (with_body) {
            fn.body = parse_block();
        } else {
            fn.has_body = false;
            expect_punct(";");
        }
        return fn;
    }

    /// Annotations keep only the base type name: generic arguments are
    /// dropped, arrow types collapse to "Function", array suffixes to
    /// "Array".
    TypeAnn parse_ann() {
        TypeAnn ann;
        ann.span = peek().span;
        if (at_punct("(")) {
            // (T, U) => R
            int depth = 0;
            do {
                if (at_punct("(")) ++depth;
                if (at_punct(")")) --depth;
                if (at_eof()) fail("unterminated arrow type");
                next();
            } while (depth > 0);
            expect_punct("=>");
            parse_ann();  // return type, collapsed away
            ann.name = "Function";
            return ann;
        }
        if (peek().kind != Tok::Ident) fail("expected type name");
        ann.name = next().text;
        if (at_punct("<")) {
            int depth = 0;
            do {
                if (at_punct("<")) ++depth;
                if (at_punct(">")) --depth;
                if (at_eof()) fail("unterminated generic annotation");
                next();
            } while (depth > 0);
        }
        while (at_punct("[")) {
            next();
            expect_punct("]");
            ann.name = "Array";
        }
        return ann;
    }

    // -- statements --
    std::vector<StmtPtr> parse_block() {
        expect_punct("{");
        std::vector<StmtPtr> body;
        while (!at_punct("}")) {
            if (at_eof()) fail("expected '}'");
            body.push_back(parse_stmt());
        }
        next();
        return body;
    }

    StmtPtr parse_stmt() {
        check_unsupported_starter();
        Span sp = peek().span;
        auto mk = [&](auto node) {
            auto s = std::make_unique<Stmt>();
            s->span = sp;
            s->node = std::move(node);
            return s;
        };
        if (at_ident("let")) {
            next();
            LetStmt ls;
            ls.name = expect_name("variable name");
            if (at_punct(":")) {
                next();
                ls.ann = parse_ann();
            }
            if (at_punct("=")) {
                next();
                ls.init = parse_expr();
            }
            expect_punct(";");
            return mk(std::move(ls));
        }
        if (at_ident("return")) {
            next();
            ReturnStmt rs;
            if (!at_punct(";")) rs.value = parse_expr();
            expect_punct(";");
            return mk(std::move(rs));
        }
        if (at_ident("if")) {
            next();
            IfStmt is;
            expect_punct("(");
            is.cond = parse_expr();
            expect_punct(")");
            is.then_body = parse_block();
            if (at_ident("else")) {
                next();
                if (at_ident("if")) {
                    is.else_body.push_back(parse_stmt());
                } else {
                    is.else_body = parse_block();
                }
            }
            return mk(std::move(is));
        }
        if (at_ident("while")) {
            next();
            WhileStmt ws;
            expect_punct("(");
            ws.cond = parse_expr();
            expect_punct(")");
            ws.body = parse_block();
            return mk(std::move(ws));
        }
        ExprPtr e = parse_expr();
        if (at_punct("=")) {
            next();
            if (!std::holds_alternative<Ident>(e->node) && !std::holds_alternative<Member>(e->node))
                throw SyntaxError(path_, sp.line, sp.col, "invalid assignment target");
            AssignStmt as;
            as.target = std::move(e);
            as.value = parse_expr();
            expect_punct(";");
            return mk(std::move(as));
        }
        expect_punct(";");
        ExprStmt es;
        es.expr = std::move(e);
        return mk(std::move(es));
    }

    // -- expressions (precedence climbing) --
    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr mk_expr(Span sp, auto node) {
        auto e = std::make_unique<Expr>();
        e->span = sp;
        e->node = std::move(node);
        return e;
    }

    ExprPtr parse_binary_level(const std::vector<std::string>& ops, ExprPtr (Parser::*sub)()) {
        ExprPtr lhs = (this->*sub)();
        while (peek().kind == Tok::Punct &&
               std::find(ops.begin(), ops.end(), peek().text) != ops.end()) {
            std::string op = next().text;
            ExprPtr rhs = (this->*sub)();
            Span sp = lhs->span;
            Binary b{op, std::move(lhs), std::move(rhs)};
            lhs = mk_expr(sp, std::move(b));
        }
        return lhs;
    }

    ExprPtr parse_or() { return parse_binary_level({"||"}, &Parser::parse_and); }
    ExprPtr parse_and() { return parse_binary_level({"&&"}, &Parser::parse_eq); }
    ExprPtr parse_eq() { return parse_binary_level({"==", "!="}, &Parser::parse_rel); }
    ExprPtr parse_rel() {
        return parse_binary_level({"<", "<=", ">", ">="}, &Parser::parse_addsub);
    }
    ExprPtr parse_addsub() { return parse_binary_level({"+", "-"}, &Parser::parse_muldiv); }
    ExprPtr parse_muldiv() { return parse_binary_level({"*", "/"}, &Parser::parse_unary); }

    ExprPtr parse_unary() {
        if (at_punct("!") || at_punct("-")) {
            Span sp = peek().span;
            std::string op = next().text;
            Unary u{op, parse_unary()};
            return mk_expr(sp, std::move(u));
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_primary();
        while (true) {
            if (at_punct(".")) {
                next();
                if (peek().kind != Tok::Ident) fail("expected member name");
                std::string name = next().text;
                Span sp = e->span;
                Member m{std::move(e), std::move(name)};
                e = mk_expr(sp, std::move(m));
            } else if (at_punct("(")) {
                next();
                Call c;
                c.callee = std::move(e);
                while (!at_punct(")")) {
                    if (!c.args.empty()) expect_punct(",");
                    c.args.push_back(parse_expr());
                }
                next();
                Span sp = c.callee->span;
                e = mk_expr(sp, std::move(c));
            } else {
                break;
            }
        }
        return e;
    }

    ExprPtr parse_primary() {
        Span sp = peek().span;
        if (peek().kind == Tok::Number) return mk_expr(sp, NumberLit{next().text});
        if (peek().kind == Tok::String) return mk_expr(sp, StringLit{next().text});
        if (at_ident("true") || at_ident("false")) return mk_expr(sp, BoolLit{next().text == "true"});
        if (peek().kind == Tok::Ident) {
            if (kUnsupportedExprHeads.count(peek().text) || kUnsupportedStarters.count(peek().text))
                throw UnsupportedConstruct(path_, sp, peek().text);
            if (kKeywords.count(peek().text)) fail("unexpected keyword '" + peek().text + "'");
            return mk_expr(sp, Ident{next().text});
        }
        if (at_punct("(")) {
            next();
            ExprPtr e = parse_expr();
            expect_punct(")");
            return e;
        }
        if (at_punct("{")) {
            next();
            ObjectLit ol;
            while (!at_punct("}")) {
                if (!ol.fields.empty()) expect_punct(",");
                if (at_punct("}")) break;  // trailing comma
                if (peek().kind != Tok::Ident) fail("expected field name");
                std::string name = next().text;
                expect_punct(":");
                ol.fields.emplace_back(std::move(name), parse_expr());
            }
            next();
            return mk_expr(sp, std::move(ol));
        }
        fail("expected expression");
    }

    std::string path_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

ast::FileAst parse_file(const std::string& path, const std::string& text) {
    Lexer lex(path, text);
    Parser p(path, lex.run());
    return p.parse_file();
}

ast::SubsetAst parse_project(const ast::SourceProject& src) {
    ast::SubsetAst out;
    out.project_id = src.project_id;
    for (const auto& f : src.files) out.files.push_back(parse_file(f.path, f.text));
    return out;
}

}  // namespace typegraph
