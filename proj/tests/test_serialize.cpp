#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>
#include <string>
#include <vector>

#include "lorentzlab/experiments.hpp"
#include "lorentzlab/norm_search.hpp"
#include "lorentzlab/polynomials.hpp"
#include "lorentzlab/sequences.hpp"
#include "lorentzlab/serialize.hpp"
#include "lorentzlab/tensor_duality.hpp"
#include "lorentzlab/weights.hpp"

using lorentz::HomogeneousPolynomial;
using lorentz::json;
using lorentz::TruncatedVector;
using lorentz::WeightSequence;

namespace {

bool same_vector(const TruncatedVector& a, const TruncatedVector& b) {
  std::size_t m = std::max(a.materialized(), b.materialized());
  for (std::size_t i = 1; i <= m; ++i)
    if (a.at(i) != b.at(i)) return false;
  if (a.tail().has_value() != b.tail().has_value()) return false;
  if (a.tail() && (a.tail()->c != b.tail()->c || a.tail()->t != b.tail()->t)) return false;
  return true;
}

json reparse(const json& j) { return json::parse(j.dump()); }

}  // namespace

TEST_CASE("weights and vectors round-trip bit-exactly through text") {
  WeightSequence pw = WeightSequence::power(0.5, 12);
  WeightSequence back = lorentz::weight_from_json(reparse(lorentz::to_json(pw)));
  REQUIRE(back.is_power());
  CHECK(back.exponent() == 0.5);
  CHECK(back.size() == 12);
  for (std::size_t i = 1; i <= 12; ++i) CHECK(back.value(i) == pw.value(i));

  WeightSequence lw = WeightSequence::from_list({1.0, 0.75, 0.3});
  WeightSequence lback = lorentz::weight_from_json(reparse(lorentz::to_json(lw)));
  REQUIRE_FALSE(lback.is_power());
  REQUIRE(lback.size() == 3);
  CHECK(lback.value(2) == 0.75);

  TruncatedVector plain(std::vector<double>{1.0, -0.3, 1.0 / 3.0});
  CHECK(same_vector(plain, lorentz::vector_from_json(reparse(lorentz::to_json(plain)))));

  TruncatedVector tailed(std::vector<double>{2.0, 1.0}, lorentz::GeometricTail{0.5, 0.25});
  json jt = lorentz::to_json(tailed);
  CHECK(jt.at("tail").at("from") == 3);
  CHECK(same_vector(tailed, lorentz::vector_from_json(reparse(jt))));

  SECTION("parsers re-run the validating constructors") {
    json bad = lorentz::to_json(plain);
    bad["coords"][0] = "oops";
    CHECK_THROWS(lorentz::vector_from_json(bad));
    json badw = lorentz::to_json(lw);
    badw["values"] = std::vector<double>{1.0, 2.0};
    CHECK_THROWS_AS(lorentz::weight_from_json(badw), std::invalid_argument);
    json badk = lorentz::to_json(pw);
    badk["kind"] = "mystery";
    CHECK_THROWS_AS(lorentz::weight_from_json(badk), std::invalid_argument);
  }
}

TEST_CASE("certificates and search results survive the wire") {
  WeightSequence w = WeightSequence::power(1.0, 32);
  lorentz::PerturbationCertificate cert =
      lorentz::certify_predual_point(TruncatedVector::basis(1), w);
  lorentz::PerturbationCertificate cback =
      lorentz::certificate_from_json(reparse(lorentz::to_json(cert)));
  CHECK(cback.n0 == cert.n0);
  CHECK(cback.delta == cert.delta);
  CHECK(same_vector(cback.subject, cert.subject));
  CHECK(lorentz::verify_certificate(cback, 33, 10 * cback.n0).pass);

  HomogeneousPolynomial p = lorentz::gallery("diag-N", w, 2, std::nullopt, 2);
  lorentz::SearchResult res = lorentz::max_norm(p, w, 24, 11);
  lorentz::SearchResult rback = lorentz::search_from_json(reparse(lorentz::to_json(res)));
  CHECK(rback.value == res.value);
  CHECK(rback.starts == res.starts);
  CHECK(rback.attained == res.attained);
  CHECK(same_vector(rback.point, res.point));
  REQUIRE(rback.traces.size() == res.traces.size());
  CHECK(rback.traces.front().value == res.traces.front().value);
  REQUIRE(rback.certificate.has_value() == res.certificate.has_value());
  if (res.certificate) CHECK(rback.certificate->delta == res.certificate->delta);

  lorentz::BruteForceBracket br = lorentz::brute_force_norm(p, w, 9);
  lorentz::BruteForceBracket bback =
      lorentz::brute_bracket_from_json(reparse(lorentz::to_json(br)));
  CHECK(bback.lower == br.lower);
  CHECK(bback.upper == br.upper);
  CHECK(same_vector(bback.at, br.at));
}

TEST_CASE("polynomials round-trip with their targets and terms") {
  WeightSequence w = WeightSequence::power(1.0, 8);
  HomogeneousPolynomial diag = lorentz::gallery("real-BP", w, 3, 2, 3);
  HomogeneousPolynomial dback = lorentz::polynomial_from_json(reparse(lorentz::to_json(diag)));
  CHECK(dback.degree() == 3);
  CHECK(dback.dim() == 3);
  CHECK(dback.target() == HomogeneousPolynomial::Target::DiagonalEllR);
  CHECK(dback.target_r() == 2.0);
  REQUIRE(dback.components() == diag.components());
  for (std::size_t c = 1; c <= diag.components(); ++c) CHECK(dback.terms(c) == diag.terms(c));

  HomogeneousPolynomial sc = lorentz::gallery("lb-real", w, 3, 2, 4);
  HomogeneousPolynomial sback = lorentz::polynomial_from_json(reparse(lorentz::to_json(sc)));
  CHECK(sback.target() == HomogeneousPolynomial::Target::Scalar);
  CHECK(sback.terms() == sc.terms());

  json bad = lorentz::to_json(sc);
  bad["terms"][0]["alpha"] = std::vector<unsigned>{1, 1};
  CHECK_THROWS_AS(lorentz::polynomial_from_json(bad), std::invalid_argument);
}

TEST_CASE("tensors, measures, and brackets round-trip") {
  WeightSequence w = WeightSequence::power(1.0, 8);
  lorentz::TensorTerm t1{2.0, TruncatedVector(std::vector<double>{2.0}), std::nullopt};
  lorentz::TensorTerm t2{-0.5, TruncatedVector(std::vector<double>{1.0, 1.0}), std::nullopt};
  lorentz::SymmetricTensorRep u(3, 2, {t1, t2});
  lorentz::SymmetricTensorRep uback = lorentz::tensor_from_json(reparse(lorentz::to_json(u)));
  CHECK(uback.degree() == 3);
  CHECK(uback.dim() == 2);
  REQUIRE(uback.terms().size() == 2);
  CHECK(uback.terms()[0].lambda == 2.0);
  CHECK(same_vector(uback.terms()[1].x, t2.x));
  CHECK_FALSE(uback.vector_valued());

  lorentz::TensorTerm ty{1.5, TruncatedVector(std::vector<double>{0.0, 1.0}),
                         TruncatedVector(std::vector<double>{1.0})};
  lorentz::SymmetricTensorRep uv(2, 2, {ty});
  lorentz::SymmetricTensorRep vback = lorentz::tensor_from_json(reparse(lorentz::to_json(uv)));
  CHECK(vback.vector_valued());
  REQUIRE(vback.terms()[0].y.has_value());
  CHECK(same_vector(*vback.terms()[0].y, *ty.y));

  json badu = lorentz::to_json(u);
  badu["terms"][0]["x"]["coords"] = std::vector<double>{0.0};
  CHECK_THROWS_AS(lorentz::tensor_from_json(badu), std::invalid_argument);

  lorentz::DiscreteMeasure mu = lorentz::representing_measure(u, w);
  json jm = lorentz::to_json(mu);
  CHECK(jm.at("total_variation").get<double>() == mu.total_variation());
  lorentz::DiscreteMeasure mback = lorentz::measure_from_json(reparse(jm));
  REQUIRE(mback.atoms.size() == mu.atoms.size());
  CHECK(mback.total_variation() == mu.total_variation());
  CHECK(same_vector(mback.atoms[0].xhat, mu.atoms[0].xhat));

  lorentz::PisBracket pb = lorentz::pis_bracket(u, w, 4, 8, 3);
  lorentz::PisBracket pback = lorentz::pis_bracket_from_json(reparse(lorentz::to_json(pb)));
  CHECK(pback.lower == pb.lower);
  CHECK(pback.upper == pb.upper);
  CHECK(pback.lower_exact == pb.lower_exact);
  REQUIRE(pback.witness.has_value() == pb.witness.has_value());
  if (pb.witness) CHECK(pback.witness->terms() == pb.witness->terms());
}

TEST_CASE("chain reports round-trip and the verdict is cross-checked") {
  WeightSequence w = WeightSequence::power(1.0, 64);
  lorentz::ChainReport rep = lorentz::lb_chain_multilinear(w, 2, 5, 0.25);
  json j = reparse(lorentz::to_json(rep));
  CHECK(j.at("chain").size() == rep.chain.size());
  CHECK(j.at("chain")[0].contains("paper_anchor"));
  lorentz::ChainReport back = lorentz::report_from_json(j);
  CHECK(back.id == rep.id);
  CHECK(back.verdict == rep.verdict);
  CHECK(back.params.weight == rep.params.weight);
  CHECK(back.params.epsilon == rep.params.epsilon);
  REQUIRE(back.chain.size() == rep.chain.size());
  for (std::size_t i = 0; i < rep.chain.size(); ++i) {
    CHECK(back.chain[i].label == rep.chain[i].label);
    CHECK(back.chain[i].lhs == rep.chain[i].lhs);
    CHECK(back.chain[i].rhs == rep.chain[i].rhs);
    CHECK(back.chain[i].slack == rep.chain[i].slack);
    CHECK(back.chain[i].pass == rep.chain[i].pass);
  }

  json lying = lorentz::to_json(rep);
  lying["verdict"] = "no contradiction at this epsilon";
  CHECK_THROWS_AS(lorentz::report_from_json(lying), std::invalid_argument);

  std::string csv = lorentz::chain_report_csv(rep);
  CHECK(csv.rfind("id,weight,N,M,n,epsilon,label,lhs,rhs,slack,pass,verdict\n", 0) == 0);
  // one header plus one row per inequality
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == 1 + rep.chain.size());
  CHECK(csv.find("contradiction reproduced: closeness-vs-gap") != std::string::npos);
  CHECK(lorentz::csv_escape("a,b") == "\"a,b\"");
  CHECK(lorentz::csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(lorentz::csv_escape("plain") == "plain");
}
