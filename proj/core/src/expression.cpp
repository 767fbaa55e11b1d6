#include "relosc/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "relosc/error.hpp"

namespace relosc {

enum class Op : std::uint8_t { Const, Time, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt, Abs };

struct Instr {
  Op op;
  int index = 0;       // Var
  double value = 0.0;  // Const, Pow exponent
};

struct Tape {
  std::vector<Instr> code;
  int max_depth = 0;
  bool uses_t = false;
  bool uses_x = false;
};

namespace {

class Parser {
 public:
  Parser(std::string_view src, int n) : src_(src), n_(n) {}

  Tape run() {
    skip();
    expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    if (tape_.code.empty()) fail("empty expression");
    int depth = 0;
    for (const Instr& in : tape_.code) {
      switch (in.op) {
        case Op::Const:
        case Op::Time:
        case Op::Var:
          ++depth;
          break;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
          --depth;
          break;
        default:
          break;
      }
      tape_.max_depth = std::max(tape_.max_depth, depth);
    }
    return std::move(tape_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void emit(Op op, int index = 0, double value = 0.0) { tape_.code.push_back({op, index, value}); }

  void expr() {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        emit(Op::Add);
      } else if (accept('-')) {
        term();
        emit(Op::Sub);
      } else {
        return;
      }
    }
  }

  void term() {
    factor();
    for (;;) {
      if (accept('*')) {
        factor();
        emit(Op::Mul);
      } else if (accept('/')) {
        factor();
        emit(Op::Div);
      } else {
        return;
      }
    }
  }

  // Unary minus binds looser than '^', so -x1^2 is -(x1^2).
  void factor() {
    if (accept('-')) {
      factor();
      emit(Op::Neg);
      return;
    }
    atom();
    if (accept('^')) {
      skip();
      emit(Op::Pow, 0, number());
    }
  }

  double number() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ == start || (pos_ == start + 1 && src_[start] == '.')) {
      pos_ = start;
      fail("expected number");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p;
        pos_ = p;
      }
    }
    double out = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, out);
    if (res.ec != std::errc()) {
      pos_ = start;
      fail("malformed number");
    }
    return out;
  }

  void atom() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      emit(Op::Const, 0, number());
      return;
    }
    if (c == '(') {
      ++pos_;
      expr();
      if (!accept(')')) fail("expected ')'");
      return;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected character '" + std::string(1, c) + "'");

    const std::size_t start = pos_;
    if (c == 'x' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      ++pos_;
      int k = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        k = k * 10 + (src_[pos_] - '0');
        if (k > 1000) break;
        ++pos_;
      }
      if (k < 1 || k > n_) {
        pos_ = start;
        fail("variable x" + std::to_string(k) + " outside dimension " + std::to_string(n_));
      }
      tape_.uses_x = true;
      emit(Op::Var, k - 1);
      return;
    }
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "t") {
      tape_.uses_t = true;
      emit(Op::Time);
      return;
    }
    Op fn;
    if (name == "sin") {
      fn = Op::Sin;
    } else if (name == "cos") {
      fn = Op::Cos;
    } else if (name == "exp") {
      fn = Op::Exp;
    } else if (name == "sqrt") {
      fn = Op::Sqrt;
    } else if (name == "abs") {
      fn = Op::Abs;
    } else {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    if (!accept('(')) fail("expected '(' after " + std::string(name));
    expr();
    if (!accept(')')) fail("expected ')'");
    emit(fn);
  }

  std::string_view src_;
  int n_;
  std::size_t pos_ = 0;
  Tape tape_;
};

[[noreturn]] void fault(const char* what) { throw EvaluationFault(what); }

inline double checked(double v, const char* what) {
  if (!std::isfinite(v)) fault(what);
  return v;
}

// Scratch buffers reused across calls on the same thread.
struct Scratch {
  std::vector<double> val;
  std::vector<double> der;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

ScalarField::ScalarField(std::string source, int arity, std::shared_ptr<const Tape> tape)
    : source_(std::move(source)), arity_(arity), tape_(std::move(tape)) {}

ScalarField ScalarField::parse(std::string_view source, int n) {
  if (n < 1 || n > kMaxDimension) throw std::invalid_argument("ScalarField: dimension out of range");
  Parser p(source, n);
  auto tape = std::make_shared<Tape>(p.run());
  return ScalarField(std::string(source), n, std::move(tape));
}

ScalarField ScalarField::constant(double value, int n) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  std::string text(buf, res.ptr);
  if (value < 0) text = "(" + text + ")";
  return parse(text, n);
}

bool ScalarField::uses_t() const noexcept { return tape_->uses_t; }
bool ScalarField::uses_x() const noexcept { return tape_->uses_x; }

double ScalarField::value(double t, std::span<const double> x) const {
  Scratch& s = scratch();
  s.val.resize(static_cast<std::size_t>(tape_->max_depth) + 1);
  double* st = s.val.data();
  int sp = -1;
  for (const Instr& in : tape_->code) {
    switch (in.op) {
      case Op::Const:
        st[++sp] = in.value;
        break;
      case Op::Time:
        st[++sp] = t;
        break;
      case Op::Var:
        st[++sp] = x[static_cast<std::size_t>(in.index)];
        break;
      case Op::Add:
        st[sp - 1] += st[sp];
        --sp;
        break;
      case Op::Sub:
        st[sp - 1] -= st[sp];
        --sp;
        break;
      case Op::Mul:
        st[sp - 1] *= st[sp];
        --sp;
        break;
      case Op::Div:
        if (st[sp] == 0.0) fault("division by zero");
        st[sp - 1] /= st[sp];
        --sp;
        break;
      case Op::Pow:
        if (st[sp] < 0.0 && in.value != std::floor(in.value)) fault("negative base with fractional exponent");
        st[sp] = checked(std::pow(st[sp], in.value), "power overflow");
        break;
      case Op::Neg:
        st[sp] = -st[sp];
        break;
      case Op::Sin:
        st[sp] = std::sin(st[sp]);
        break;
      case Op::Cos:
        st[sp] = std::cos(st[sp]);
        break;
      case Op::Exp:
        st[sp] = checked(std::exp(st[sp]), "exp overflow");
        break;
      case Op::Sqrt:
        if (st[sp] < 0.0) fault("sqrt of negative value");
        st[sp] = std::sqrt(st[sp]);
        break;
      case Op::Abs:
        st[sp] = std::abs(st[sp]);
        break;
    }
  }
  return checked(st[0], "non-finite field value");
}

double ScalarField::value_and_gradient(double t, std::span<const double> x, std::span<double> grad) const {
  const int n = arity_;
  const std::size_t depth = static_cast<std::size_t>(tape_->max_depth) + 1;
  Scratch& s = scratch();
  s.val.resize(depth);
  s.der.resize(depth * static_cast<std::size_t>(n));
  double* v = s.val.data();
  double* d = s.der.data();
  int sp = -1;
  auto D = [&](int slot) { return d + static_cast<std::ptrdiff_t>(slot) * n; };

  for (const Instr& in : tape_->code) {
    switch (in.op) {
      case Op::Const:
      case Op::Time: {
        ++sp;
        v[sp] = in.op == Op::Const ? in.value : t;
        double* ds = D(sp);
        for (int k = 0; k < n; ++k) ds[k] = 0.0;
        break;
      }
      case Op::Var: {
        ++sp;
        v[sp] = x[static_cast<std::size_t>(in.index)];
        double* ds = D(sp);
        for (int k = 0; k < n; ++k) ds[k] = 0.0;
        ds[in.index] = 1.0;
        break;
      }
      case Op::Add:
      case Op::Sub: {
        const double sign = in.op == Op::Add ? 1.0 : -1.0;
        double* a = D(sp - 1);
        const double* b = D(sp);
        v[sp - 1] += sign * v[sp];
        for (int k = 0; k < n; ++k) a[k] += sign * b[k];
        --sp;
        break;
      }
      case Op::Mul: {
        double* a = D(sp - 1);
        const double* b = D(sp);
        const double va = v[sp - 1], vb = v[sp];
        for (int k = 0; k < n; ++k) a[k] = a[k] * vb + va * b[k];
        v[sp - 1] = va * vb;
        --sp;
        break;
      }
      case Op::Div: {
        double* a = D(sp - 1);
        const double* b = D(sp);
        const double va = v[sp - 1], vb = v[sp];
        if (vb == 0.0) fault("division by zero");
        const double q = va / vb;
        for (int k = 0; k < n; ++k) a[k] = (a[k] - q * b[k]) / vb;
        v[sp - 1] = q;
        --sp;
        break;
      }
      case Op::Pow: {
        const double base = v[sp];
        const double e = in.value;
        if (base < 0.0 && e != std::floor(e)) fault("negative base with fractional exponent");
        double dfac = 0.0;
        if (e != 0.0) {
          if (base == 0.0 && e < 1.0) fault("derivative of power unbounded at zero");
          dfac = e * std::pow(base, e - 1.0);
        }
        v[sp] = checked(std::pow(base, e), "power overflow");
        checked(dfac, "power overflow");
        double* a = D(sp);
        for (int k = 0; k < n; ++k) a[k] *= dfac;
        break;
      }
      case Op::Neg: {
        v[sp] = -v[sp];
        double* a = D(sp);
        for (int k = 0; k < n; ++k) a[k] = -a[k];
        break;
      }
      case Op::Sin:
      case Op::Cos:
      case Op::Exp:
      case Op::Sqrt:
      case Op::Abs: {
        const double u = v[sp];
        double f = 0.0, df = 0.0;
        switch (in.op) {
          case Op::Sin:
            f = std::sin(u);
            df = std::cos(u);
            break;
          case Op::Cos:
            f = std::cos(u);
            df = -std::sin(u);
            break;
          case Op::Exp:
            f = checked(std::exp(u), "exp overflow");
            df = f;
            break;
          case Op::Sqrt:
            if (u < 0.0) fault("sqrt of negative value");
            f = std::sqrt(u);
            if (f == 0.0) {
              bool moving = false;
              for (int k = 0; k < n; ++k) moving = moving || D(sp)[k] != 0.0;
              if (moving) fault("derivative of sqrt unbounded at zero");
            } else {
              df = 0.5 / f;
            }
            break;
          default:  // Abs; subgradient 0 at the kink
            f = std::abs(u);
            df = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
            break;
        }
        v[sp] = f;
        double* a = D(sp);
        for (int k = 0; k < n; ++k) a[k] *= df;
        break;
      }
    }
  }
  checked(v[0], "non-finite field value");
  for (int k = 0; k < n; ++k) grad[static_cast<std::size_t>(k)] = checked(d[k], "non-finite field derivative");
  return v[0];
}

}  // namespace relosc
