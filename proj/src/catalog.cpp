#include "covspec/catalog.hpp"

#include <charconv>
#include <cmath>

#include "covspec/detail/numfmt.hpp"
#include "covspec/errors.hpp"

namespace covspec {

namespace {

using E = OperatorExpr;

E t1() { return E::left_integration(); }
E p1() { return E::const_projector(); }
E i1() { return E::identity(); }

E bold_t(int d) { return lift(t1(), d); }
E bold_r(int d) { return lift(E::flip(), d); }
E imp(int d) { return lift(i1() - p1(), d); }  // I - P, lifted: I#..#I - P#..#P

// I - a*P, lifted
E imp_a(double a, int d) { return lift(E::sum({{1.0, i1()}, {-a, p1()}}), d); }

E chain(std::vector<E> fs) { return E::compose(std::move(fs)); }

E power(const E& e, int k) {
  std::vector<E> fs(static_cast<std::size_t>(k), e);
  return chain(std::move(fs));
}

E flip_conj(const E& e, int d) { return chain({bold_r(d), e, bold_r(d)}); }

// d-fold tensor of a 1-d expression (distinct from lift: (x)(I-P) vs I-P lifted)
E tensor_pow(const E& e, int d) {
  std::vector<E> fs(static_cast<std::size_t>(d), e);
  return E::tensor(std::move(fs));
}

E mult_d(const std::string& f, int d) { return lift(E::multiplier(f), d); }

// covariance builders -------------------------------------------------------

E cov_wiener(int d) { return chain({bold_t(d), bold_t(d).adj()}); }
E cov_inverted_wiener(int d) { return chain({bold_t(d).adj(), bold_t(d)}); }
E cov_pinned(int d) { return chain({bold_t(d), imp(d), bold_t(d).adj()}); }
E cov_pillow(int d) { return chain({bold_t(d), tensor_pow(i1() - p1(), d), bold_t(d).adj()}); }
E cov_kiefer() {
  return E::tensor({chain({t1(), t1().adj()}), chain({t1(), i1() - p1(), t1().adj()})});
}
E cov_rl(double alpha) {
  E ta = E::rl_integration(alpha);
  return chain({ta, ta.adj()});
}
E cov_rl_bridge(double alpha) {
  E ta = E::rl_integration(alpha);
  return chain({ta, i1() - p1(), ta.adj()});
}
E cov_weighted(const std::string& f, int d) {
  return chain({mult_d(f, d), cov_pinned(d), mult_d(f, d)});
}
E cov_int_wiener(int extra, int d) {
  return chain({power(bold_t(d), extra + 1), power(bold_t(d).adj(), extra + 1)});
}
E cov_bridged_int_wiener(int n) {
  E pn = E::poly_projector(n);
  return chain({power(t1(), n + 1), i1() - pn, power(t1().adj(), n + 1)});
}
E cov_pinned_a(double a, int d) {
  return chain({bold_t(d), imp_a(a, d), imp_a(a, d), bold_t(d).adj()});
}
E cov_centered_a(double a, int d) {
  return chain({imp_a(a, d), bold_t(d), bold_t(d).adj(), imp_a(a, d)});
}

E wrap_centered(const E& k, int d) { return chain({imp(d), k, imp(d)}); }
E wrap_int_left(const E& k, int d) { return chain({bold_t(d), k, bold_t(d).adj()}); }
E wrap_int_right(const E& k, int d) { return chain({bold_t(d).adj(), k, bold_t(d)}); }
E wrap_detrended(const E& k, int order) {
  E pn = E::poly_projector(order);
  return chain({i1() - pn, k, i1() - pn});
}

// name parsing ---------------------------------------------------------------

struct NamePart {
  std::string head;
  std::vector<std::string> args;
};

NamePart split_part(const std::string& s) {
  auto lb = s.find('[');
  if (lb == std::string::npos) return {s, {}};
  if (s.back() != ']') throw ArgumentError("malformed catalog name '" + s + "'");
  NamePart part{s.substr(0, lb), {}};
  std::string body = s.substr(lb + 1, s.size() - lb - 2);
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto comma = body.find(',', pos);
    if (comma == std::string::npos) {
      part.args.push_back(body.substr(pos));
      break;
    }
    part.args.push_back(body.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return part;
}

double arg_real(const NamePart& p, std::size_t idx) {
  if (idx >= p.args.size())
    throw ArgumentError("catalog name '" + p.head + "' is missing a parameter");
  auto parsed = detail::parse_double_prefix(p.args[idx]);
  if (!parsed || parsed->second != p.args[idx].size())
    throw ArgumentError("catalog name '" + p.head + "': bad numeric parameter '" + p.args[idx] +
                        "'");
  return parsed->first;
}

int arg_int(const NamePart& p, std::size_t idx) {
  double v = arg_real(p, idx);
  int n = static_cast<int>(std::llround(v));
  if (v != n) throw ArgumentError("catalog name '" + p.head + "': parameter must be an integer");
  return n;
}

}  // namespace

ProcessSpec covariance_expr(const std::string& name, int d) {
  if (d < 1) throw ArgumentError("covariance_expr: dimension must be positive");
  std::vector<std::string> segments;
  std::size_t pos = 0;
  while (pos <= name.size()) {
    auto colon = name.find(':', pos);
    if (colon == std::string::npos) {
      segments.push_back(name.substr(pos));
      break;
    }
    segments.push_back(name.substr(pos, colon - pos));
    pos = colon + 1;
  }
  if (segments.empty() || segments.back().empty())
    throw ArgumentError("covariance_expr: empty catalog name");

  ProcessSpec spec;
  spec.name = name;
  spec.dim = d;
  NamePart base = split_part(segments.back());

  auto require_d1 = [&](const char* what) {
    if (d != 1) throw ArgumentError(std::string(what) + " is defined for d=1 only");
  };

  E cov = [&]() -> E {
    if (base.head == "wiener" || base.head == "brownian-sheet") return cov_wiener(d);
    if (base.head == "inverted-wiener") return cov_inverted_wiener(d);
    if (base.head == "bridge") {
      require_d1("bridge");
      return cov_pinned(1);
    }
    if (base.head == "pinned-sheet") return cov_pinned(d);
    if (base.head == "pillow") return cov_pillow(d);
    if (base.head == "kiefer") {
      if (d != 2) throw ArgumentError("kiefer is defined for d=2 only");
      return cov_kiefer();
    }
    if (base.head == "rl") {
      require_d1("rl");
      double alpha = arg_real(base, 0);
      if (!(alpha > 0.5)) throw ArgumentError("rl[alpha] requires alpha > 1/2");
      spec.params["alpha"] = alpha;
      return cov_rl(alpha);
    }
    if (base.head == "rl-bridge") {
      require_d1("rl-bridge");
      double alpha = arg_real(base, 0);
      if (!(alpha > 0.5)) throw ArgumentError("rl-bridge[alpha] requires alpha > 1/2");
      spec.params["alpha"] = alpha;
      return cov_rl_bridge(alpha);
    }
    if (base.head == "weighted") {
      if (base.args.empty()) throw ArgumentError("weighted[f] requires a weight name");
      spec.weight = base.args[0];
      return cov_weighted(base.args[0], d);
    }
    if (base.head == "int-wiener") {
      int n = arg_int(base, 0);
      if (n < 0) throw ArgumentError("int-wiener[n] requires n >= 0");
      spec.params["integrations"] = n;
      return cov_int_wiener(n, d);
    }
    if (base.head == "bridged-int-wiener") {
      require_d1("bridged-int-wiener");
      int n = arg_int(base, 0);
      if (n < 0) throw ArgumentError("bridged-int-wiener[n] requires n >= 0");
      spec.params["order"] = n;
      return cov_bridged_int_wiener(n);
    }
    if (base.head == "pinned-a") {
      spec.params["a"] = arg_real(base, 0);
      return cov_pinned_a(spec.params["a"], d);
    }
    if (base.head == "centered-a") {
      spec.params["a"] = arg_real(base, 0);
      return cov_centered_a(spec.params["a"], d);
    }
    throw ArgumentError("unknown catalog name '" + base.head + "'");
  }();

  // wrappers apply innermost-last (rightmost segment is the base)
  for (auto it = segments.rbegin() + 1; it != segments.rend(); ++it) {
    NamePart w = split_part(*it);
    if (w.head == "centered") {
      cov = wrap_centered(cov, d);
    } else if (w.head == "int-left") {
      cov = wrap_int_left(cov, d);
    } else if (w.head == "int-right") {
      cov = wrap_int_right(cov, d);
    } else if (w.head == "detrended") {
      require_d1("detrended[n]");
      int order = arg_int(w, 0);
      if (order < 0) throw ArgumentError("detrended[n] requires n >= 0");
      spec.params["detrend_order"] = order;
      cov = wrap_detrended(cov, order);
    } else {
      throw ArgumentError("unknown wrapper '" + w.head + "'");
    }
  }
  spec.covariance = normalize(cov);
  return spec;
}

namespace {

ProcessSpec named(std::string name, int d, E cov,
                  std::map<std::string, double> params = {}) {
  ProcessSpec s;
  s.name = std::move(name);
  s.dim = d;
  s.params = std::move(params);
  s.covariance = normalize(cov);
  return s;
}

std::vector<TheoremPair> build_pairs() {
  std::vector<TheoremPair> ps;

  // Centered Wiener vs Brownian bridge; the right side is the swapped
  // factorization conjugated by the flip.
  ps.push_back({"eq1", "centered Wiener ~ Brownian bridge", {1}, Exactness::MatrixExact, true,
                [](int) {
                  return named("centered:wiener", 1,
                               chain({imp(1), t1(), t1().adj(), imp(1)}));
                },
                [](int) {
                  return named("bridge", 1,
                               flip_conj(chain({t1().adj(), imp(1), imp(1), t1()}), 1));
                }});

  for (std::string f : {"x", "sqrtx"}) {
    ps.push_back({"thm1-" + f, "centered weighted Wiener integral ~ weighted bridge", {1},
                  Exactness::MatrixExact, true,
                  [f](int) {
                    E s = E::multiplier(f);
                    return named("centered:wiener-integral[" + f + "]", 1,
                                 chain({imp(1), t1(), s, s, t1().adj(), imp(1)}));
                  },
                  [f](int) {
                    E s = E::multiplier(f);
                    return named("weighted-bridge[" + f + "]", 1,
                                 chain({s, t1().adj(), imp(1), t1(), s}));
                  }});
  }

  for (double alpha : {0.75, 1.5}) {
    std::string id = "thm2-a" + detail::format_double(alpha);
    ps.push_back({id, "Riemann-Liouville bridge ~ centered Riemann-Liouville", {1},
                  Exactness::MatrixExact, true,
                  [alpha](int) {
                    return named("rl-bridge[" + detail::format_double(alpha) + "]", 1,
                                 cov_rl_bridge(alpha), {{"alpha", alpha}});
                  },
                  [alpha](int) {
                    E ta = E::rl_integration(alpha);
                    return named("centered:rl[" + detail::format_double(alpha) + "]", 1,
                                 flip_conj(chain({imp(1), ta.adj(), ta, imp(1)}), 1),
                                 {{"alpha", alpha}});
                  }});
  }

  ps.push_back({"thm3", "pinned Brownian sheet ~ centered Brownian sheet", {1, 2, 3},
                Exactness::MatrixExact, true,
                [](int d) { return named("pinned-sheet", d, cov_pinned(d)); },
                [](int d) {
                  return named("centered:brownian-sheet", d,
                               flip_conj(chain({imp(d), bold_t(d).adj(), bold_t(d), imp(d)}), d));
                }});

  for (double a : {-1.0, 0.5, 1.0, 2.0}) {
    std::string id = "rel-a[" + detail::format_double(a) + "]";
    ps.push_back({id, "sheet pinned with weight a ~ sheet centered with weight a", {1, 2},
                  Exactness::MatrixExact, true,
                  [a](int d) {
                    return named("pinned-a[" + detail::format_double(a) + "]", d,
                                 cov_pinned_a(a, d), {{"a", a}});
                  },
                  [a](int d) {
                    return named("centered-a[" + detail::format_double(a) + "]", d,
                                 flip_conj(chain({imp_a(a, d), bold_t(d).adj(), bold_t(d),
                                                  imp_a(a, d)}),
                                           d),
                                 {{"a", a}});
                  }});
  }

  auto pillow_rhs = [](int d) {
    return named("pillow-partial-integrals", d,
                 chain({tensor_pow(i1() - p1(), d), bold_t(d).adj(), bold_t(d),
                        tensor_pow(i1() - p1(), d)}));
  };
  ps.push_back({"pillow-3.26", "Brownian pillow ~ inclusion-exclusion partial integrals", {2},
                Exactness::MatrixExact, true,
                [](int d) { return named("pillow", d, cov_pillow(d)); }, pillow_rhs});
  ps.push_back({"pillow-trivar", "trivariate Brownian pillow analog", {3},
                Exactness::MatrixExact, true,
                [](int d) { return named("pillow", d, cov_pillow(d)); }, pillow_rhs});
  ps.push_back({"pillow-dual", "the two factored pillow forms agree", {1, 2},
                Exactness::MatrixExact, true,
                [](int d) { return named("pillow", d, cov_pillow(d)); },
                [](int d) {
                  return named("pillow-dual-form", d,
                               chain({bold_t(d).adj(), tensor_pow(i1() - p1(), d), bold_t(d)}));
                }});

  ps.push_back({"kiefer-3.27", "Kiefer field ~ sheet centered in the second variable", {2},
                Exactness::MatrixExact, true,
                [](int) { return named("kiefer", 2, cov_kiefer()); },
                [](int) {
                  return named("wiener-x-centered-wiener", 2,
                               E::tensor({chain({t1(), t1().adj()}),
                                          chain({imp(1), t1(), t1().adj(), imp(1)})}));
                }});

  // Multivariate weighted statement; the flip lands on the weight, so the
  // equivalent weighted pinned sheet carries f(1-x) rather than f(x).
  ps.push_back({"remark1", "centered weighted sheet integral ~ flip-weighted pinned sheet", {2},
                Exactness::MatrixExact, true,
                [](int d) {
                  return named("centered:sheet-integral[x]", d,
                               chain({imp(d), bold_t(d), mult_d("x", d), mult_d("x", d),
                                      bold_t(d).adj(), imp(d)}));
                },
                [](int d) {
                  return named("weighted[1-x]", d, cov_weighted("1-x", d));
                }});

  auto int_pair = [](std::string id, std::string summary, int m) {
    // m integrations applied on top of the sheet; left variant.
    return TheoremPair{std::move(id), std::move(summary), {1, 2}, Exactness::MatrixExact, true,
                       [m](int d) {
                         return named("int-left^" + std::to_string(m) + ":pinned-sheet", d,
                                      chain({power(bold_t(d), m + 1), imp(d),
                                             power(bold_t(d).adj(), m + 1)}),
                                      {{"integrations", m}});
                       },
                       [m](int d) {
                         return named("centered:int-left^" + std::to_string(m) + ":brownian-sheet",
                                      d,
                                      flip_conj(chain({imp(d), power(bold_t(d).adj(), m + 1),
                                                       power(bold_t(d), m + 1), imp(d)}),
                                                d),
                                      {{"integrations", m}});
                       }};
  };
  ps.push_back(int_pair("thm4-left", "left-integrated pinned sheet ~ centered integrated sheet", 1));
  ps.push_back({"thm4-right", "right-integrated pinned sheet ~ centered integrated sheet", {1, 2},
                Exactness::MatrixExact, true,
                [](int d) {
                  return named("int-right:pinned-sheet", d,
                               chain({bold_t(d).adj(), bold_t(d), imp(d), bold_t(d).adj(),
                                      bold_t(d)}));
                },
                [](int d) {
                  return named("centered:int-right:brownian-sheet", d,
                               chain({imp(d), bold_t(d).adj(), bold_t(d), bold_t(d).adj(),
                                      bold_t(d), imp(d)}));
                }});
  ps.push_back(int_pair("remark3-n2", "twice-integrated variant of the integrated-sheet pair", 2));
  ps.push_back(int_pair("remark3-n3", "thrice-integrated variant of the integrated-sheet pair", 3));

  auto cent_int_pair = [](std::string id, std::string summary, int m) {
    // m rounds of centered left integration.
    return TheoremPair{
        std::move(id), std::move(summary), {1, 2}, Exactness::MatrixExact, true,
        [m](int d) {
          std::vector<E> fs;
          for (int k = 0; k < m; ++k) {
            fs.push_back(bold_t(d));
            fs.push_back(imp(d));
          }
          E head = chain(fs);
          return named("centered-int-left^" + std::to_string(m) + ":pinned-sheet", d,
                       chain({head, bold_t(d), imp(d), bold_t(d).adj(), head.adj()}),
                       {{"rounds", m}});
        },
        [m](int d) {
          E a = chain({imp(d), bold_t(d).adj()});
          E b = chain({bold_t(d), imp(d)});
          return named("centered:centered-int-left^" + std::to_string(m) + ":brownian-sheet", d,
                       flip_conj(chain({power(a, m + 1), power(b, m + 1)}), d),
                       {{"rounds", m}});
        }};
  };
  ps.push_back(cent_int_pair("thm5-left",
                             "integrated centered pinned sheet ~ centered integrated centered sheet",
                             1));
  ps.push_back({"thm5-right", "right-integrated centered pinned sheet variant", {1, 2},
                Exactness::MatrixExact, true,
                [](int d) {
                  return named("centered-int-right:pinned-sheet", d,
                               chain({bold_t(d).adj(), imp(d), bold_t(d), imp(d),
                                      bold_t(d).adj(), imp(d), bold_t(d)}));
                },
                [](int d) {
                  return named("centered:centered-int-right:brownian-sheet", d,
                               chain({imp(d), bold_t(d).adj(), imp(d), bold_t(d),
                                      bold_t(d).adj(), imp(d), bold_t(d), imp(d)}));
                }});
  ps.push_back(cent_int_pair("remark4-n2", "two rounds of centered integration", 2));
  ps.push_back(cent_int_pair("remark4-n3", "three rounds of centered integration", 3));

  ps.push_back({"thm6", "centered right-integrated pinned sheet ~ right-integrated centered sheet",
                {1, 2}, Exactness::MatrixExact, true,
                [](int d) {
                  return named("centered:int-right:pinned-sheet", d,
                               chain({imp(d), bold_t(d).adj(), bold_t(d), imp(d),
                                      bold_t(d).adj(), bold_t(d), imp(d)}));
                },
                [](int d) {
                  return named("int-right:centered:brownian-sheet", d,
                               flip_conj(chain({bold_t(d), imp(d), bold_t(d).adj(), bold_t(d),
                                                imp(d), bold_t(d).adj()}),
                                         d));
                }});

  for (int n : {1, 2, 3}) {
    std::string id = "thm7-n" + std::to_string(n);
    ps.push_back({id, "detrended n-times integrated Wiener ~ bridged integrated Wiener", {1},
                  Exactness::MatrixExact, true,
                  [n](int) {
                    E pn = E::poly_projector(n);
                    return named("detrended[" + std::to_string(n) + "]:int-wiener[" +
                                     std::to_string(n) + "]",
                                 1,
                                 chain({i1() - pn, power(t1(), n + 1), power(t1().adj(), n + 1),
                                        i1() - pn}),
                                 {{"order", n}});
                  },
                  [n](int) {
                    E pn = E::poly_projector(n);
                    return named("bridged-int-wiener[" + std::to_string(n) + "]", 1,
                                 flip_conj(chain({power(t1().adj(), n + 1), i1() - pn,
                                                  power(t1(), n + 1)}),
                                           1),
                                 {{"order", n}});
                  }});
  }

  // Mixed-side multiply-integrated relation, reading [011] as one left then
  // two right integrations. Verifiable but left out of the default suite.
  ps.push_back({"remark5", "centered [011]-integrated pinned sheet ~ [11]-integrated centered"
                           " integrated sheet",
                {1, 2}, Exactness::MatrixExact, false,
                [](int d) {
                  E u = chain({power(bold_t(d).adj(), 2), power(bold_t(d), 2)});
                  return named("centered:int-right^2:int-left:pinned-sheet", d,
                               chain({imp(d), u, imp(d), u, imp(d)}));
                },
                [](int d) {
                  return named("int-right^2:centered:int-left:brownian-sheet", d,
                               chain({power(bold_t(d).adj(), 2), imp(d), power(bold_t(d), 2),
                                      power(bold_t(d).adj(), 2), imp(d), power(bold_t(d), 2)}));
                }});

  return ps;
}

}  // namespace

const std::vector<TheoremPair>& theorem_pairs() {
  static const std::vector<TheoremPair> pairs = build_pairs();
  return pairs;
}

const TheoremPair& find_pair(const std::string& id) {
  for (const auto& p : theorem_pairs())
    if (p.id == id) return p;
  throw ArgumentError("unknown theorem pair '" + id + "'");
}

std::vector<std::string> pair_ids_with_prefix(const std::string& prefix) {
  std::vector<std::string> out;
  for (const auto& p : theorem_pairs())
    if (p.id.rfind(prefix, 0) == 0) out.push_back(p.id);
  return out;
}

}  // namespace covspec
