#include "ccep/core/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "ccep/core/error.hpp"
#include "ccep/core/predicate.hpp"

namespace ccep {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

double numeric_attribute(const Event& e, const std::string& name) {
  auto it = e.attributes.find(name);
  if (it == e.attributes.end()) throw EvaluationError("missing attribute '" + name + "'");
  if (!is_number(it->second)) throw EvaluationError("attribute '" + name + "' is not numeric");
  return std::get<double>(it->second);
}

const Value& attribute(const Event& e, const std::string& name) {
  auto it = e.attributes.find(name);
  if (it == e.attributes.end()) throw EvaluationError("missing attribute '" + name + "'");
  return it->second;
}

Event make_output(const std::string& type, const std::string& trigger, std::uint64_t ordinal,
                  TimeMs when, Attributes attrs) {
  Event out;
  out.event_type = type;
  out.event_id = derived_event_id(type, trigger, ordinal);
  out.occurrence_time = when;
  out.attributes = std::move(attrs);
  return out;
}

bool time_order_less(const Event& a, const Event& b) {
  return a.occurrence_time != b.occurrence_time ? a.occurrence_time < b.occurrence_time
                                                : a.event_id < b.event_id;
}

template <typename T>
T param(const nlohmann::json& params, const char* key, const std::string& type_name) {
  try {
    return params.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DefinitionError(type_name + ": missing or malformed parameter '" + key + "'");
  }
}

}  // namespace

std::string partition_id(const ContextSpec& spec, const Event& e) {
  switch (spec.kind) {
    case ContextKind::Semantic:
      return to_key_string(attribute(e, spec.partition_key));
    case ContextKind::Spatial: {
      double x = numeric_attribute(e, spec.grid->x_attribute);
      double y = numeric_attribute(e, spec.grid->y_attribute);
      auto cx = static_cast<std::int64_t>(std::floor(x / spec.grid->cell));
      auto cy = static_cast<std::int64_t>(std::floor(y / spec.grid->cell));
      return std::to_string(cx) + ":" + std::to_string(cy);
    }
    case ContextKind::Temporal:
      if (spec.window && spec.window->time_ms && spec.window->mode == WindowMode::Tumbling)
        return std::to_string(floor_div(e.occurrence_time, *spec.window->time_ms));
      return "*";
  }
  return "*";
}

struct Evaluator::Kernel {
  virtual ~Kernel() = default;
  virtual std::vector<Event> apply(const EventTypeDefinition& def, const Event& e,
                                   ContextState& st) const = 0;
};

namespace {

using Kernel = Evaluator::Kernel;

class FilterKernel final : public Kernel {
 public:
  explicit FilterKernel(const EventTypeDefinition& def)
      : pred_(Predicate::parse(param<std::string>(def.params, "predicate", def.name))) {}

  std::vector<Event> apply(const EventTypeDefinition& def, const Event& e,
                           ContextState&) const override {
    if (!pred_.evaluate(e.attributes)) return {};
    return {make_output(def.name, e.event_id, 0, e.occurrence_time, e.attributes)};
  }

 private:
  Predicate pred_;
};

class ProjectionKernel final : public Kernel {
 public:
  explicit ProjectionKernel(const EventTypeDefinition& def)
      : keep_(param<std::vector<std::string>>(def.params, "keep", def.name)) {
    if (keep_.empty()) throw DefinitionError(def.name + ": Projection keeps no attributes");
  }

  std::vector<Event> apply(const EventTypeDefinition& def, const Event& e,
                           ContextState&) const override {
    Attributes out;
    for (const auto& k : keep_) out.emplace(k, attribute(e, k));
    return {make_output(def.name, e.event_id, 0, e.occurrence_time, std::move(out))};
  }

 private:
  std::vector<std::string> keep_;
};

class TranslationKernel final : public Kernel {
  enum class Op { Copy, Rename, Set, Add, Sub, Mul, Div, Concat };
  struct Rewrite {
    std::string target;
    std::string source;
    Op op;
    Value operand;
  };

 public:
  explicit TranslationKernel(const EventTypeDefinition& def) {
    auto list = def.params.find("rewrites");
    if (list == def.params.end() || !list->is_array() || list->empty())
      throw DefinitionError(def.name + ": Translation needs a non-empty 'rewrites' array");
    for (const auto& r : *list) {
      Rewrite rw;
      try {
        rw.target = r.at("target").get<std::string>();
        rw.source = r.value("source", std::string{});
        auto op = r.at("op").get<std::string>();
        if (op == "copy") rw.op = Op::Copy;
        else if (op == "rename") rw.op = Op::Rename;
        else if (op == "set") rw.op = Op::Set;
        else if (op == "add") rw.op = Op::Add;
        else if (op == "sub") rw.op = Op::Sub;
        else if (op == "mul") rw.op = Op::Mul;
        else if (op == "div") rw.op = Op::Div;
        else if (op == "concat") rw.op = Op::Concat;
        else throw DefinitionError(def.name + ": unknown rewrite op '" + op + "'");
        if (r.contains("operand")) rw.operand = value_from_json(r.at("operand"));
      } catch (const nlohmann::json::exception& ex) {
        throw DefinitionError(def.name + ": bad rewrite: " + ex.what());
      } catch (const DecodeError& ex) {
        throw DefinitionError(def.name + ": bad rewrite operand: " + ex.what());
      }
      if (rw.target.empty()) throw DefinitionError(def.name + ": rewrite target must be non-empty");
      bool arithmetic = rw.op == Op::Add || rw.op == Op::Sub || rw.op == Op::Mul || rw.op == Op::Div;
      if (arithmetic && !is_number(rw.operand))
        throw DefinitionError(def.name + ": arithmetic rewrite needs a numeric operand");
      if (rw.op != Op::Set && rw.source.empty())
        throw DefinitionError(def.name + ": rewrite of '" + rw.target + "' needs a source");
      rewrites_.push_back(std::move(rw));
    }
  }

  std::vector<Event> apply(const EventTypeDefinition& def, const Event& e,
                           ContextState&) const override {
    Attributes out = e.attributes;
    for (const auto& rw : rewrites_) {
      if (rw.op == Op::Set) {
        out[rw.target] = rw.operand;
        continue;
      }
      auto it = out.find(rw.source);
      if (it == out.end()) throw EvaluationError("missing attribute '" + rw.source + "'");
      Value src = it->second;
      switch (rw.op) {
        case Op::Copy: out[rw.target] = src; break;
        case Op::Rename:
          out.erase(rw.source);
          out[rw.target] = src;
          break;
        case Op::Concat: out[rw.target] = to_key_string(src) + to_key_string(rw.operand); break;
        default: {
          if (!is_number(src)) throw EvaluationError("attribute '" + rw.source + "' is not numeric");
          double a = std::get<double>(src);
          double b = std::get<double>(rw.operand);
          double r = 0;
          if (rw.op == Op::Add) r = a + b;
          else if (rw.op == Op::Sub) r = a - b;
          else if (rw.op == Op::Mul) r = a * b;
          else {
            if (b == 0) throw EvaluationError("division by zero");
            r = a / b;
          }
          out[rw.target] = r;
        }
      }
    }
    return {make_output(def.name, e.event_id, 0, e.occurrence_time, std::move(out))};
  }

 private:
  std::vector<Rewrite> rewrites_;
};

class DivisionKernel final : public Kernel {
 public:
  explicit DivisionKernel(const EventTypeDefinition& def)
      : label_attribute_(def.params.value("label_attribute", std::string("branch"))) {
    auto list = def.params.find("branches");
    if (list == def.params.end() || !list->is_array() || list->empty())
      throw DefinitionError(def.name + ": Division needs a non-empty 'branches' array");
    for (const auto& b : *list) {
      branches_.emplace_back(param<std::string>(b, "label", def.name),
                             Predicate::parse(param<std::string>(b, "predicate", def.name)));
    }
  }

  std::vector<Event> apply(const EventTypeDefinition& def, const Event& e,
                           ContextState&) const override {
    std::vector<Event> out;
    for (const auto& [label, pred] : branches_) {
      if (!pred.evaluate(e.attributes)) continue;
      Attributes attrs = e.attributes;
      attrs[label_attribute_] = label;
      out.push_back(make_output(def.name, e.event_id, out.size(), e.occurrence_time, std::move(attrs)));
    }
    return out;
  }

 private:
  std::string label_attribute_;
  std::vector<std::pair<std::string, Predicate>> branches_;
};

class EnrichmentKernel final : public Kernel {
 public:
  explicit EnrichmentKernel(const EventTypeDefinition& def)
      : key_(param<std::string>(def.params, "key", def.name)) {
    auto mode = def.params.value("on_missing", std::string("pass"));
    if (mode != "pass" && mode != "drop")
      throw DefinitionError(def.name + ": on_missing must be 'pass' or 'drop'");
    drop_missing_ = mode == "drop";
    auto table = def.params.find("table");
    if (table == def.params.end() || !table->is_object())
      throw DefinitionError(def.name + ": Enrichment needs a 'table' object");
    try {
      for (const auto& [k, row] : table->items()) table_.emplace(k, attributes_from_json(row));
    } catch (const DecodeError& ex) {
      throw DefinitionError(def.name + ": bad enrichment table: " + ex.what());
    }
  }

  std::vector<Event> apply(const EventTypeDefinition& def, const Event& e,
                           ContextState&) const override {
    auto row = table_.find(to_key_string(attribute(e, key_)));
    if (row == table_.end() && drop_missing_) return {};
    Attributes attrs = e.attributes;
    if (row != table_.end())
      for (const auto& [k, v] : row->second) attrs.emplace(k, v);
    return {make_output(def.name, e.event_id, 0, e.occurrence_time, std::move(attrs))};
  }

 private:
  std::string key_;
  bool drop_missing_ = false;
  std::map<std::string, Attributes> table_;
};

// Shared helpers for the windowed kernels.
class StatefulKernel : public Kernel {
 protected:
  explicit StatefulKernel(const EventTypeDefinition& def) : ctx_(*def.context) {}

  std::int64_t retention(const WindowSpec& w) const { return w.length() + ctx_.allowed_lateness_ms; }

  /// True when `e` falls before the still-open time window.
  bool too_late(const ContextState& st, const Event& e, const WindowSpec& w) const {
    return st.max_seen_time >= 0 && e.occurrence_time < st.max_seen_time - retention(w);
  }

  /// Drops events that can no longer take part in any window. Runs whenever the
  /// watermark has advanced by a quarter of the retention span.
  void sweep(ContextState& st, const WindowSpec& w) const {
    auto span = retention(w);
    auto step = std::max<std::int64_t>(1, span / 4);
    if (st.sweep_mark >= 0 && st.max_seen_time - st.sweep_mark < step) return;
    st.sweep_mark = st.max_seen_time;
    auto horizon = st.max_seen_time - span;
    for (auto it = st.partitions.begin(); it != st.partitions.end();) {
      auto& buf = it->second;
      std::erase_if(buf, [&](const Event& b) { return b.occurrence_time < horizon; });
      it = buf.empty() ? st.partitions.erase(it) : std::next(it);
    }
  }

  ContextSpec ctx_;
};

class AggregationKernel final : public StatefulKernel {
  enum class Fn { Sum, Avg, Min, Max, Count };

 public:
  explicit AggregationKernel(const EventTypeDefinition& def) : StatefulKernel(def) {
    if (!ctx_.window) throw DefinitionError(def.name + ": Aggregation needs a window");
    auto fn = param<std::string>(def.params, "function", def.name);
    if (fn == "sum") fn_ = Fn::Sum;
    else if (fn == "avg") fn_ = Fn::Avg;
    else if (fn == "min") fn_ = Fn::Min;
    else if (fn == "max") fn_ = Fn::Max;
    else if (fn == "count") fn_ = Fn::Count;
    else throw DefinitionError(def.name + ": unknown aggregation function '" + fn + "'");
    if (fn_ != Fn::Count) attribute_ = param<std::string>(def.params, "attribute", def.name);
    output_ = def.params.value("output", fn);
  }

  std::vector<Event> apply(const EventTypeDefinition& def, const Event& e,
                           ContextState& st) const override {
    const auto& w = *ctx_.window;
    auto pid = partition_id(ctx_, e);
    if (fn_ != Fn::Count) (void)numeric_attribute(e, attribute_);

    std::vector<Event> out;
    if (w.count_based()) {
      auto& buf = st.partitions[pid];
      buf.push_back(e);
      auto n = static_cast<std::size_t>(*w.count);
      if (w.mode == WindowMode::Sliding && buf.size() > n) buf.erase(buf.begin());
      if (buf.size() == n) {
        out.push_back(emit(def, e, pid, buf, 0));
        if (w.mode == WindowMode::Tumbling) st.partitions.erase(pid);
      }
      st.max_seen_time = std::max(st.max_seen_time, e.occurrence_time);
      return out;
    }

    auto len = *w.time_ms;
    if (w.mode == WindowMode::Tumbling && ctx_.kind == ContextKind::Temporal) {
      // Partitions are the buckets themselves; they close once the watermark
      // passes their end.
      auto bucket = floor_div(e.occurrence_time, len);
      auto mark = std::max(st.max_seen_time, e.occurrence_time) - ctx_.allowed_lateness_ms;
      if (st.max_seen_time >= 0 && (bucket + 1) * len <= mark) {
        ++st.late_dropped;
        return out;
      }
      st.partitions[pid].push_back(e);
      st.max_seen_time = std::max(st.max_seen_time, e.occurrence_time);
      std::vector<std::pair<std::int64_t, std::string>> closing;
      for (const auto& [p, buf] : st.partitions) {
        auto b = std::stoll(p);
        if ((b + 1) * len <= mark) closing.emplace_back(b, p);
      }
      std::sort(closing.begin(), closing.end());
      for (const auto& [b, p] : closing) {
        out.push_back(emit(def, e, p, st.partitions[p], out.size()));
        st.partitions.erase(p);
      }
      return out;
    }

    if (w.mode == WindowMode::Tumbling) {
      // Per-partition bucket; closes when the next bucket of the same
      // partition starts.
      auto bucket = floor_div(e.occurrence_time, len);
      auto& buf = st.partitions[pid];
      if (!buf.empty()) {
        auto open = floor_div(buf.front().occurrence_time, len);
        if (bucket < open) {
          ++st.late_dropped;
          return out;
        }
        if (bucket > open) {
          out.push_back(emit(def, e, pid, buf, 0));
          buf.clear();
        }
      }
      buf.push_back(e);
      st.max_seen_time = std::max(st.max_seen_time, e.occurrence_time);
      return out;
    }

    // Sliding time window, evaluated on arrival.
    if (too_late(st, e, w)) {
      ++st.late_dropped;
      return out;
    }
    auto& buf = st.partitions[pid];
    buf.insert(std::upper_bound(buf.begin(), buf.end(), e, time_order_less), e);
    auto newest = buf.back().occurrence_time;
    std::erase_if(buf, [&](const Event& b) { return b.occurrence_time <= newest - len; });
    st.max_seen_time = std::max(st.max_seen_time, e.occurrence_time);
    bool kept = std::any_of(buf.begin(), buf.end(),
                            [&](const Event& b) { return b.event_id == e.event_id; });
    if (kept) out.push_back(emit(def, e, pid, buf, 0));
    else ++st.late_dropped;
    if (buf.empty()) st.partitions.erase(pid);
    sweep(st, w);
    return out;
  }

 private:
  Event emit(const EventTypeDefinition& def, const Event& trigger, const std::string& pid,
             const std::vector<Event>& buf, std::uint64_t ordinal) const {
    double acc = 0;
    switch (fn_) {
      case Fn::Count: acc = static_cast<double>(buf.size()); break;
      case Fn::Sum:
      case Fn::Avg:
        for (const auto& b : buf) acc += numeric_attribute(b, attribute_);
        if (fn_ == Fn::Avg) acc /= static_cast<double>(buf.size());
        break;
      case Fn::Min:
        acc = std::numeric_limits<double>::infinity();
        for (const auto& b : buf) acc = std::min(acc, numeric_attribute(b, attribute_));
        break;
      case Fn::Max:
        acc = -std::numeric_limits<double>::infinity();
        for (const auto& b : buf) acc = std::max(acc, numeric_attribute(b, attribute_));
        break;
    }
    Attributes attrs;
    switch (ctx_.kind) {
      case ContextKind::Semantic: attrs.emplace(ctx_.partition_key, buf.front().attributes.at(ctx_.partition_key)); break;
      case ContextKind::Spatial: attrs.emplace("cell", pid); break;
      case ContextKind::Temporal:
        if (pid != "*") attrs.emplace("window_start", static_cast<double>(std::stoll(pid) * *ctx_.window->time_ms));
        break;
    }
    attrs[output_] = acc;
    return make_output(def.name, trigger.event_id, ordinal, trigger.occurrence_time, std::move(attrs));
  }

  Fn fn_ = Fn::Sum;
  std::string attribute_;
  std::string output_;
};

class CompositionKernel final : public StatefulKernel {
 public:
  explicit CompositionKernel(const EventTypeDefinition& def) : StatefulKernel(def) {
    if (!ctx_.window) throw DefinitionError(def.name + ": Composition needs a window");
  }

  std::vector<Event> apply(const EventTypeDefinition& def, const Event& e,
                           ContextState& st) const override {
    const auto& w = *ctx_.window;
    auto pid = partition_id(ctx_, e);
    bool left = e.event_type == def.inputs[0];
    const auto& other_type = left ? def.inputs[1] : def.inputs[0];

    std::vector<Event> out;
    if (!w.count_based() && too_late(st, e, w)) {
      ++st.late_dropped;
      return out;
    }
    auto& buf = st.partitions[pid];
    std::vector<const Event*> partners;
    for (const auto& b : buf) {
      if (b.event_type != other_type) continue;
      if (!w.count_based() && std::llabs(b.occurrence_time - e.occurrence_time) > *w.time_ms) continue;
      partners.push_back(&b);
    }
    std::sort(partners.begin(), partners.end(),
              [](const Event* a, const Event* b) { return time_order_less(*a, *b); });
    for (const Event* p : partners) {
      const Event& l = left ? e : *p;
      const Event& r = left ? *p : e;
      Attributes attrs = l.attributes;
      for (const auto& [k, v] : r.attributes) attrs.emplace(k, v);
      attrs["left_id"] = l.event_id;
      attrs["right_id"] = r.event_id;
      out.push_back(make_output(def.name, l.event_id + "|" + r.event_id, 0,
                                std::max(l.occurrence_time, r.occurrence_time), std::move(attrs)));
    }
    buf.push_back(e);
    if (w.count_based()) {
      auto own = std::count_if(buf.begin(), buf.end(),
                               [&](const Event& b) { return b.event_type == e.event_type; });
      if (own > *w.count) {
        auto oldest = std::find_if(buf.begin(), buf.end(),
                                   [&](const Event& b) { return b.event_type == e.event_type; });
        buf.erase(oldest);
      }
    }
    st.max_seen_time = std::max(st.max_seen_time, e.occurrence_time);
    if (!w.count_based()) sweep(st, w);
    return out;
  }
};

class PatternKernel final : public StatefulKernel {
  struct Step {
    std::string type;
    std::optional<Predicate> predicate;
  };

 public:
  explicit PatternKernel(const EventTypeDefinition& def) : StatefulKernel(def) {
    if (!ctx_.window || !ctx_.window->time_ms)
      throw DefinitionError(def.name + ": PatternDetection needs a time window");
    auto seq = def.params.find("sequence");
    if (seq == def.params.end() || !seq->is_array() || seq->size() < 2)
      throw DefinitionError(def.name + ": PatternDetection needs a 'sequence' of at least two steps");
    for (const auto& s : *seq) {
      Step step{param<std::string>(s, "type", def.name), std::nullopt};
      if (s.contains("predicate")) step.predicate = Predicate::parse(param<std::string>(s, "predicate", def.name));
      if (std::find(def.inputs.begin(), def.inputs.end(), step.type) == def.inputs.end())
        throw DefinitionError(def.name + ": sequence step '" + step.type + "' is not an input");
      steps_.push_back(std::move(step));
    }
    for (const auto& in : def.inputs) {
      if (std::none_of(steps_.begin(), steps_.end(), [&](const Step& s) { return s.type == in; }))
        throw DefinitionError(def.name + ": input '" + in + "' is not used by any sequence step");
    }
  }

  std::vector<Event> apply(const EventTypeDefinition& def, const Event& e,
                           ContextState& st) const override {
    const auto& w = *ctx_.window;
    auto pid = partition_id(ctx_, e);
    std::vector<std::size_t> fills;
    for (std::size_t i = 0; i < steps_.size(); ++i)
      if (matches(i, e)) fills.push_back(i);

    std::vector<Event> out;
    if (too_late(st, e, w)) {
      ++st.late_dropped;
      return out;
    }
    st.max_seen_time = std::max(st.max_seen_time, e.occurrence_time);
    if (fills.empty()) {
      sweep(st, w);
      return out;
    }
    auto& buf = st.partitions[pid];
    std::vector<const Event*> sorted;
    sorted.reserve(buf.size());
    for (const auto& b : buf) sorted.push_back(&b);
    std::sort(sorted.begin(), sorted.end(),
              [](const Event* a, const Event* b) { return time_order_less(*a, *b); });

    std::vector<const Event*> combo(steps_.size(), nullptr);
    for (auto j : fills) {
      combo.assign(steps_.size(), nullptr);
      combo[j] = &e;
      enumerate(def, sorted, combo, 0, j, *w.time_ms, out);
    }
    buf.push_back(e);
    sweep(st, w);
    return out;
  }

 private:
  bool matches(std::size_t step, const Event& e) const {
    const auto& s = steps_[step];
    return s.type == e.event_type && (!s.predicate || s.predicate->evaluate(e.attributes));
  }

  // Buffered events were accepted earlier; a predicate of another step that
  // cannot be evaluated on them simply does not match.
  bool matches_buffered(std::size_t step, const Event& e) const {
    try {
      return matches(step, e);
    } catch (const EvaluationError&) {
      return false;
    }
  }

  void enumerate(const EventTypeDefinition& def, const std::vector<const Event*>& sorted,
                 std::vector<const Event*>& combo, std::size_t pos, std::size_t fixed,
                 std::int64_t bound, std::vector<Event>& out) const {
    if (pos == combo.size()) {
      const Event* first = combo.front();
      const Event* last = combo.back();
      if (last->occurrence_time - first->occurrence_time > bound) return;
      std::string trigger;
      Attributes attrs;
      for (const Event* c : combo) {
        if (!trigger.empty()) trigger += '|';
        trigger += c->event_id;
        for (const auto& [k, v] : c->attributes) attrs.emplace(k, v);
      }
      attrs["span_ms"] = static_cast<double>(last->occurrence_time - first->occurrence_time);
      out.push_back(make_output(def.name, trigger, 0, last->occurrence_time, std::move(attrs)));
      return;
    }
    if (pos == fixed) {
      if (pos > 0 && !time_order_less(*combo[pos - 1], *combo[pos])) return;
      enumerate(def, sorted, combo, pos + 1, fixed, bound, out);
      return;
    }
    for (const Event* cand : sorted) {
      if (pos > 0 && !time_order_less(*combo[pos - 1], *cand)) continue;
      if (pos < fixed && !time_order_less(*cand, *combo[fixed])) break;
      if (!matches_buffered(pos, *cand)) continue;
      combo[pos] = cand;
      enumerate(def, sorted, combo, pos + 1, fixed, bound, out);
      combo[pos] = nullptr;
    }
  }

  std::vector<Step> steps_;
};

std::shared_ptr<const Kernel> make_kernel(const EventTypeDefinition& def) {
  switch (def.op) {
    case Operator::Filtering: return std::make_shared<FilterKernel>(def);
    case Operator::Projection: return std::make_shared<ProjectionKernel>(def);
    case Operator::Translation: return std::make_shared<TranslationKernel>(def);
    case Operator::Division: return std::make_shared<DivisionKernel>(def);
    case Operator::Enrichment: return std::make_shared<EnrichmentKernel>(def);
    case Operator::Aggregation: return std::make_shared<AggregationKernel>(def);
    case Operator::Composition: return std::make_shared<CompositionKernel>(def);
    case Operator::PatternDetection: return std::make_shared<PatternKernel>(def);
  }
  throw DefinitionError(def.name + ": unknown operator");
}

}  // namespace

Evaluator::Evaluator(EventTypeDefinition def) : def_(std::move(def)) {
  if (!is_stateless(def_.op) && !def_.context)
    throw DefinitionError(def_.name + ": stateful operators require a context");
  kernel_ = make_kernel(def_);
}

ContextState Evaluator::initial_state() const {
  ContextState s;
  s.owner_type = def_.name;
  return s;
}

std::vector<Event> Evaluator::evaluate(const Event& input, ContextState& state) const {
  if (std::find(def_.inputs.begin(), def_.inputs.end(), input.event_type) == def_.inputs.end())
    throw EvaluationError(def_.name + ": '" + input.event_type + "' is not an input");
  if (!stateful()) return kernel_->apply(def_, input, state);
  if (state.owner_type.empty()) state.owner_type = def_.name;
  if (state.owner_type != def_.name)
    throw std::invalid_argument("context state belongs to '" + state.owner_type + "', not '" +
                                def_.name + "'");
  return kernel_->apply(def_, input, state);
}

std::vector<Event> evaluate(const EventTypeDefinition& def, const Event& input, ContextState& state) {
  return Evaluator(def).evaluate(input, state);
}

}  // namespace ccep
