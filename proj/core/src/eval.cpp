#include "nucleitrace/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <tuple>

#include "nucleitrace/diagnostics.hpp"

namespace nucleitrace {

EvalSequence sequence_from_masks(std::vector<LabelImage> masks, std::vector<TrackRecord> tracks) {
  EvalSequence seq;
  for (const LabelImage& m : masks) {
    std::map<Label, std::array<double, 4>> sums;  // x, y, z, count
    for (Index i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      const auto v = m.dims().coords(i);
      auto& s = sums[m[i]];
      s[0] += double(v[0]);
      s[1] += double(v[1]);
      s[2] += double(v[2]);
      s[3] += 1.0;
    }
    std::vector<EvalObject> objs;
    for (const auto& [id, s] : sums) objs.push_back({id, {s[0] / s[3], s[1] / s[3], s[2] / s[3]}});
    seq.frames.push_back(std::move(objs));
  }
  seq.masks = std::move(masks);
  seq.tracks = std::move(tracks);
  return seq;
}

namespace {

using FrameMatch = std::map<Label, Label>;  // truth id -> result id

FrameMatch match_frame(const std::vector<EvalObject>& result, const std::vector<EvalObject>& truth, double r_match) {
  std::vector<std::tuple<double, Label, Label>> pairs;
  for (const EvalObject& t : truth) {
    for (const EvalObject& r : result) {
      const double d = distance(t.centroid, r.centroid);
      if (d <= r_match) pairs.emplace_back(d, t.id, r.id);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  FrameMatch m;
  std::map<Label, bool> used;
  for (const auto& [d, t, r] : pairs) {
    if (m.count(t) || used[r]) continue;
    m[t] = r;
    used[r] = true;
  }
  return m;
}

const Label* lookup(const std::vector<FrameMatch>& matches, int frame, Label id) {
  if (frame < 0 || std::size_t(frame) >= matches.size()) return nullptr;
  const auto it = matches[std::size_t(frame)].find(id);
  return it == matches[std::size_t(frame)].end() ? nullptr : &it->second;
}

double ratio(long num, long den) { return den == 0 ? 1.0 : double(num) / double(den); }

}  // namespace

EvalReport evaluate(const EvalSequence& result, const EvalSequence& truth, double r_match) {
  if (!(r_match > 0.0)) throw ParameterError("evaluate: r_match must be > 0");
  if (result.frames.size() != truth.frames.size()) {
    throw DataError("result has " + std::to_string(result.frames.size()) + " frames, truth has " +
                    std::to_string(truth.frames.size()));
  }
  EvalReport rep;
  std::vector<FrameMatch> matches;
  long result_objects = 0;
  for (std::size_t t = 0; t < truth.frames.size(); ++t) {
    matches.push_back(match_frame(result.frames[t], truth.frames[t], r_match));
    const long tp = long(matches.back().size());
    rep.true_positives += tp;
    rep.false_positives += long(result.frames[t].size()) - tp;
    rep.false_negatives += long(truth.frames[t].size()) - tp;
    result_objects += long(result.frames[t].size());
  }
  if (result_objects == 0) warn("evaluate: the result has no objects; precision is reported as 1");
  rep.precision = ratio(rep.true_positives, rep.true_positives + rep.false_positives);
  rep.recall = ratio(rep.true_positives, rep.true_positives + rep.false_negatives);

  std::map<Label, TrackRecord> res_tracks, gt_tracks;
  for (const TrackRecord& r : result.tracks) res_tracks[r.label] = r;
  for (const TrackRecord& r : truth.tracks) gt_tracks[r.label] = r;

  // True if result objects a (frame t) and b (frame t + 1) are joined the
  // way truth expects: the same track, or parent and a daughter starting at t + 1.
  const auto joined = [&](Label a, Label b, int t, bool division) {
    if (!division) return a == b;
    const auto it = res_tracks.find(b);
    return it != res_tracks.end() && it->second.parent == a && it->second.begin == t + 1;
  };

  std::map<Label, std::vector<Label>> children;
  for (const auto& [id, r] : gt_tracks) {
    if (r.parent) children[r.parent].push_back(id);
  }
  for (const auto& [id, r] : gt_tracks) {
    for (int t = r.begin; t < r.end; ++t) {
      ++rep.links;
      const Label* a = lookup(matches, t, id);
      const Label* b = lookup(matches, t + 1, id);
      if (a && b && joined(*a, *b, t, false)) ++rep.links_found;
    }
    if (r.parent) {
      const int t = r.begin - 1;
      ++rep.links;
      const Label* a = lookup(matches, t, r.parent);
      const Label* b = lookup(matches, t + 1, id);
      if (a && b && joined(*a, *b, t, true)) ++rep.links_found;
    }
  }
  for (const auto& [parent, kids] : children) {
    if (kids.size() < 2) continue;
    ++rep.divisions;
    const int t = gt_tracks[parent].end;
    const Label* a = lookup(matches, t, parent);
    bool found = a != nullptr;
    for (Label k : kids) {
      const Label* b = lookup(matches, t + 1, k);
      found = found && b && joined(*a, *b, t, true);
    }
    if (found) ++rep.divisions_found;
  }
  rep.link_accuracy = ratio(rep.links_found, rep.links);
  rep.division_recall = ratio(rep.divisions_found, rep.divisions);

  double iou_sum = 0.0;
  if (!result.masks.empty() && !truth.masks.empty()) {
    if (result.masks.size() != truth.frames.size() || truth.masks.size() != truth.frames.size()) {
      throw DataError("evaluate: mask count differs from frame count");
    }
    for (std::size_t t = 0; t < truth.frames.size(); ++t) {
      const LabelImage& rm = result.masks[t];
      const LabelImage& gm = truth.masks[t];
      if (rm.dims() != gm.dims()) {
        throw DataError("evaluate: frame " + std::to_string(t) + " mask sizes differ (" + rm.dims().str() + " vs " +
                        gm.dims().str() + ")");
      }
      std::map<Label, long> ra, ga;
      std::map<std::pair<Label, Label>, long> inter;
      for (Index i = 0; i < rm.size(); ++i) {
        if (rm[i]) ++ra[rm[i]];
        if (gm[i]) ++ga[gm[i]];
        if (rm[i] && gm[i]) ++inter[{gm[i], rm[i]}];
      }
      for (const auto& [g, r] : matches[t]) {
        const auto it = inter.find({g, r});
        const long n = it == inter.end() ? 0 : it->second;
        const long u = ra[r] + ga[g] - n;
        iou_sum += u > 0 ? double(n) / double(u) : 0.0;
        ++rep.iou_pairs;
      }
    }
  }
  rep.mean_iou = rep.iou_pairs ? iou_sum / double(rep.iou_pairs) : 1.0;
  return rep;
}

std::string format_report(const EvalReport& r) {
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "detection precision  %8.4f  (%ld tp, %ld fp)\n"
                "detection recall     %8.4f  (%ld fn)\n"
                "link accuracy        %8.4f  (%ld of %ld)\n"
                "division recall      %8.4f  (%ld of %ld)\n"
                "mean IoU             %8.4f  (%ld pairs)\n"
                "precision=%.6f\nrecall=%.6f\nlink_accuracy=%.6f\ndivision_recall=%.6f\nmean_iou=%.6f\n",
                r.precision, r.true_positives, r.false_positives, r.recall, r.false_negatives, r.link_accuracy,
                r.links_found, r.links, r.division_recall, r.divisions_found, r.divisions, r.mean_iou, r.iou_pairs,
                r.precision, r.recall, r.link_accuracy, r.division_recall, r.mean_iou);
  return buf;
}

}  // namespace nucleitrace
