#pragma once

#include <span>
#include <string>
#include <vector>

#include "nucleitrace/image.hpp"
#include "nucleitrace/track_table.hpp"

namespace nucleitrace {

/// One labeled object in one frame, reduced to its centroid.
struct EvalObject {
  Label id = 0;
  Point centroid{0, 0, 0};
};

/// A tracking result or ground truth: objects per frame, the track table
/// and, optionally, the label masks the objects came from.
struct EvalSequence {
  std::vector<std::vector<EvalObject>> frames;
  std::vector<TrackRecord> tracks;
  std::vector<LabelImage> masks;  // empty when only centroids are known
};

/// Objects of every nonzero label of each mask, ascending id.
EvalSequence sequence_from_masks(std::vector<LabelImage> masks, std::vector<TrackRecord> tracks);

struct EvalReport {
  double precision = 1.0;
  double recall = 1.0;
  double link_accuracy = 1.0;
  double division_recall = 1.0;
  double mean_iou = 1.0;

  long true_positives = 0;
  long false_positives = 0;
  long false_negatives = 0;
  long links = 0;
  long links_found = 0;
  long divisions = 0;
  long divisions_found = 0;
  long iou_pairs = 0;
};

/// Compares `result` with `truth` frame by frame.
///
/// Objects are matched greedily: all result/truth pairs closer than
/// `r_match` are taken in ascending distance (ties by truth id, then result
/// id), each object at most once. A truth link joins consecutive frames of
/// one track, or a mother's last frame to a daughter's first; it is found
/// when both ends are matched and the matched result objects are joined the
/// same way. A truth division is found when its mother's last object and
/// every daughter's first object are matched, and in the result the
/// daughters' tracks start there with the mother's track as parent. IoU is
/// averaged over matched pairs when both sides have masks.
///
/// Metrics without anything to count are 1. An empty result warns.
EvalReport evaluate(const EvalSequence& result, const EvalSequence& truth, double r_match);

/// Aligned table followed by `key=value` lines.
std::string format_report(const EvalReport& report);

}  // namespace nucleitrace
