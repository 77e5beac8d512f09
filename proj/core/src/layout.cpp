// Sibling packing follows the front-chain method used by d3-hierarchy's
// packSiblings (Wang et al., "Visualization of large hierarchical data by
// circle packing"); enclosure is the incremental basis search from
// d3's packEnclose without the random shuffle.

#include "comviewer/layout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace comviewer::layout {
namespace {

// Places c tangent to both a and b, on the left of a -> b.
void place(const Circle& b, const Circle& a, Circle& c) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double d2 = dx * dx + dy * dy;
  if (d2 > 0) {
    double a2 = a.r + c.r;
    a2 *= a2;
    double b2 = b.r + c.r;
    b2 *= b2;
    if (a2 > b2) {
      const double x = (d2 + b2 - a2) / (2 * d2);
      const double y = std::sqrt(std::max(0.0, b2 / d2 - x * x));
      c.x = b.x - x * dx - y * dy;
      c.y = b.y - x * dy + y * dx;
    } else {
      const double x = (d2 + a2 - b2) / (2 * d2);
      const double y = std::sqrt(std::max(0.0, a2 / d2 - x * x));
      c.x = a.x + x * dx - y * dy;
      c.y = a.y + x * dy + y * dx;
    }
  } else {
    c.x = a.x + c.r;
    c.y = a.y;
  }
}

bool intersects(const Circle& a, const Circle& b, double eps) {
  const double dr = a.r + b.r - eps;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return dr > 0 && dr * dr > dx * dx + dy * dy;
}

struct Node {
  Circle* c;
  Node* next = nullptr;
  Node* prev = nullptr;
};

// Squared distance from the origin to the weighted midpoint of a and
// a->next; the front is re-anchored at the pair closest to the centroid.
double score(const Node* n) {
  const Circle& a = *n->c;
  const Circle& b = *n->next->c;
  const double ab = a.r + b.r;
  const double dx = (a.x * b.r + b.x * a.r) / ab;
  const double dy = (a.y * b.r + b.y * a.r) / ab;
  return dx * dx + dy * dy;
}

bool encloses_not(const Circle& a, const Circle& b) {
  const double dr = a.r - b.r;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return dr < 0 || dr * dr < dx * dx + dy * dy;
}

bool encloses_weak(const Circle& a, const Circle& b) {
  const double dr = a.r - b.r + std::max({a.r, b.r, 1.0}) * 1e-9;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return dr > 0 && dr * dr > dx * dx + dy * dy;
}

bool encloses_weak_all(const Circle& a, const std::vector<Circle>& basis) {
  return std::all_of(basis.begin(), basis.end(), [&](const Circle& b) { return encloses_weak(a, b); });
}

Circle enclose2(const Circle& a, const Circle& b) {
  const double x21 = b.x - a.x;
  const double y21 = b.y - a.y;
  const double r21 = b.r - a.r;
  const double l = std::sqrt(x21 * x21 + y21 * y21);
  if (l == 0) return a.r >= b.r ? a : b;
  return {(a.x + b.x + x21 / l * r21) / 2, (a.y + b.y + y21 / l * r21) / 2, (l + a.r + b.r) / 2};
}

Circle enclose3(const Circle& a, const Circle& b, const Circle& c) {
  const double x1 = a.x, y1 = a.y, r1 = a.r;
  const double x2 = b.x, y2 = b.y, r2 = b.r;
  const double x3 = c.x, y3 = c.y, r3 = c.r;
  const double a2 = x1 - x2, a3 = x1 - x3;
  const double b2 = y1 - y2, b3 = y1 - y3;
  const double c2 = r2 - r1, c3 = r3 - r1;
  const double d1 = x1 * x1 + y1 * y1 - r1 * r1;
  const double d2 = d1 - x2 * x2 - y2 * y2 + r2 * r2;
  const double d3 = d1 - x3 * x3 - y3 * y3 + r3 * r3;
  const double ab = a3 * b2 - a2 * b3;
  const double xa = (b2 * d3 - b3 * d2) / (ab * 2) - x1;
  const double xb = (b3 * c2 - b2 * c3) / ab;
  const double ya = (a3 * d2 - a2 * d3) / (ab * 2) - y1;
  const double yb = (a2 * c3 - a3 * c2) / ab;
  const double A = xb * xb + yb * yb - 1;
  const double B = 2 * (r1 + xa * xb + ya * yb);
  const double C = xa * xa + ya * ya - r1 * r1;
  const double r = -(std::abs(A) > 1e-6 ? (B + std::sqrt(std::max(0.0, B * B - 4 * A * C))) / (2 * A) : C / B);
  return {x1 + xa + xb * r, y1 + ya + yb * r, r};
}

Circle enclose_basis(const std::vector<Circle>& basis) {
  switch (basis.size()) {
    case 1: return basis[0];
    case 2: return enclose2(basis[0], basis[1]);
    case 3: return enclose3(basis[0], basis[1], basis[2]);
    default: throw std::logic_error("enclose_basis: basis size out of range");
  }
}

std::vector<Circle> extend_basis(const std::vector<Circle>& basis, const Circle& p) {
  if (encloses_weak_all(p, basis)) return {p};

  for (const auto& b : basis) {
    if (encloses_not(p, b) && encloses_weak_all(enclose2(b, p), basis)) return {b, p};
  }
  for (std::size_t i = 0; i + 1 < basis.size(); ++i) {
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      const auto& bi = basis[i];
      const auto& bj = basis[j];
      if (encloses_not(enclose2(bi, bj), p) && encloses_not(enclose2(bi, p), bj) &&
          encloses_not(enclose2(bj, p), bi) && encloses_weak_all(enclose3(bi, bj, p), basis)) {
        return {bi, bj, p};
      }
    }
  }
  throw std::logic_error("enclose: degenerate basis");
}

}  // namespace

void pack_siblings(std::span<Circle> circles) {
  const std::size_t n = circles.size();
  if (n == 0) return;

  double max_r = 0.0;
  for (const auto& c : circles) max_r = std::max(max_r, c.r);
  const double eps = 1e-6 * std::max(max_r, 1.0);

  Circle& first = circles[0];
  first.x = 0;
  first.y = 0;
  if (n == 1) return;

  Circle& second = circles[1];
  first.x = -second.r;
  second.x = first.r;
  second.y = 0;
  if (n == 2) return;

  place(circles[1], circles[0], circles[2]);

  std::vector<Node> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i].c = &circles[i];

  Node* a = &nodes[0];
  Node* b = &nodes[1];
  Node* c = &nodes[2];
  a->next = c->prev = b;
  b->next = a->prev = c;
  c->next = b->prev = a;

  for (std::size_t i = 3; i < n; ++i) {
    place(*a->c, *b->c, circles[i]);
    c = &nodes[i];

    // Closest intersecting circle on the front, measured along the chain.
    Node* j = b->next;
    Node* k = a->prev;
    double sj = b->c->r;
    double sk = a->c->r;
    bool retry = false;
    do {
      if (sj <= sk) {
        if (intersects(*j->c, *c->c, eps)) {
          b = j;
          a->next = b;
          b->prev = a;
          retry = true;
          break;
        }
        sj += j->c->r;
        j = j->next;
      } else {
        if (intersects(*k->c, *c->c, eps)) {
          a = k;
          a->next = b;
          b->prev = a;
          retry = true;
          break;
        }
        sk += k->c->r;
        k = k->prev;
      }
    } while (j != k->next);
    if (retry) {
      --i;
      continue;
    }

    c->prev = a;
    c->next = b;
    a->next = c;
    b->prev = c;
    b = c;

    double best = score(a);
    while ((c = c->next) != b) {
      const double s = score(c);
      if (s < best) {
        a = c;
        best = s;
      }
    }
    b = a->next;
  }
}

Circle enclose(std::span<const Circle> circles) {
  if (circles.empty()) return {};
  std::vector<Circle> basis;
  Circle e{};
  bool have = false;
  std::size_t i = 0;
  while (i < circles.size()) {
    const auto& p = circles[i];
    if (have && encloses_weak(e, p)) {
      ++i;
    } else {
      basis = extend_basis(basis, p);
      e = enclose_basis(basis);
      have = true;
      i = 0;
    }
  }
  return e;
}

double containing_radius(std::span<const Circle> circles, double cx, double cy) {
  double r = 0.0;
  for (const auto& c : circles) r = std::max(r, std::hypot(c.x - cx, c.y - cy) + c.r);
  return r;
}

}  // namespace comviewer::layout
