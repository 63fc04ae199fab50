#include <gtest/gtest.h>

#include <random>

#include "ctgn/diff/layers.hpp"
#include "ctgn/errors.hpp"
#include "ctgn/graph/neighbors.hpp"
#include "ctgn/memory.hpp"
#include "ctgn/time_codec.hpp"
#include "ctgn/train/gradcheck_suite.hpp"
#include "ctgn/train/toy.hpp"

using namespace ctgn;

namespace {

Event ev(NodeId s, NodeId d, double t, double dur = 1.0) {
  Event e;
  e.src = s;
  e.dst = d;
  e.t = t;
  e.duration = dur;
  return e;
}

struct Fixture {
  MemoryModule module;
  ParamSet params;

  explicit Fixture(MemoryConfig c, std::uint64_t seed = 1) : module(std::move(c)) {
    std::mt19937_64 rng(seed);
    add_time_encoder(params, "time", 3);
    module.add_params(params, rng);
  }
};

MemoryConfig small(bool has_duration = true) {
  MemoryConfig c;
  c.dim = 4;
  c.has_duration = has_duration;
  return c;
}

// Replays a stream eagerly batch by batch.
MemoryState replay(const Fixture& f, const EventStore& s, std::size_t batch) {
  MemoryState m(s.num_nodes(), f.module.config().dim);
  for (auto b : iterate_batches(s, batch)) f.module.stage_and_apply(f.params, m, b);
  return m;
}

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

TEST(Messages, LatestInteractionWins) {
  Fixture f(small());
  MemoryState m(4, 4);
  const std::vector<Event> batch{ev(0, 1, 5, 2.0), ev(2, 0, 9, 7.0)};
  const auto msgs = f.module.compute_messages(batch, m);
  ASSERT_EQ(msgs.size(), 3u);
  EXPECT_EQ(msgs.at(0).t, 9.0);
  EXPECT_EQ(msgs.at(0).other, 2u);
  EXPECT_EQ(msgs.at(0).delta, 7.0);
  EXPECT_EQ(msgs.at(1).t, 5.0);
  EXPECT_EQ(msgs.at(2).other, 0u);
}

TEST(Messages, ContactSequenceDeltaIsTimeSinceLastUpdate) {
  Fixture f(small(false));
  MemoryState m(2, 4);
  m.write(0, std::vector<double>(4, 0.0), 7.0);
  const std::vector<Event> batch{ev(0, 1, 10, 0.0)};
  const auto msgs = f.module.compute_messages(batch, m);
  EXPECT_EQ(msgs.at(0).delta, 3.0);
  EXPECT_EQ(msgs.at(1).delta, 10.0);
}

TEST(Messages, BlindFlagZeroesDelta) {
  MemoryConfig c = small();
  c.duration_blind = true;
  Fixture f(c);
  MemoryState m(2, 4);
  const std::vector<Event> batch{ev(0, 1, 10, 5.0)};
  for (const auto& [_, msg] : f.module.compute_messages(batch, m)) EXPECT_EQ(msg.delta, 0.0);
}

TEST(Messages, FirstEventUsesZeroMemories) {
  Fixture f(small());
  MemoryState m(2, 4);
  Tape tape;
  ParamVars p(tape, f.params, false);
  const std::vector<Event> batch{ev(0, 1, 10, 5.0)};
  const auto upd = f.module.update(p, m, f.module.compute_messages(batch, m));
  // Oracle: both GRUs fed [0 || 0 || phi(5)] with a zero state.
  const std::vector<double> five{5.0};
  Var zero = tape.constant(Tensor::zeros(1, 4));
  const std::vector<Var> parts{zero, zero, encode_time(p, "time", five)};
  Var msg = nn::gru_cell(p, "msg", ops::concat_cols(parts), zero);
  const Tensor expect = nn::gru_cell(p, "mem", msg, zero).value();
  ASSERT_EQ(upd.nodes, (std::vector<NodeId>{0, 1}));
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(upd.values.value()(r, k), expect(0, k));
}

TEST(UpdateMemory, ZeroWeightGruHalvesState) {
  MemoryConfig c;
  c.dim = 1;
  Fixture f(c);
  for (auto& [name, t] : f.params)
    if (name.rfind("msg/", 0) == 0 || name.rfind("mem/", 0) == 0)
      for (auto& x : t.data()) x = 0.0;
  MemoryState m(3, 1);
  m.write(0, std::vector<double>{0.8}, 1.0);
  m.write(2, std::vector<double>{0.4}, 1.0);
  MessageMap msgs;
  msgs[0] = RawMessage{0, 1, 2.0, 1.0, {}};
  f.module.update_memory(f.params, m, msgs);
  // Message GRU gives 0.5 * 0.8, memory GRU then halves the previous state.
  EXPECT_DOUBLE_EQ(m.memory(0)[0], 0.4);
  EXPECT_EQ(m.last_update(0), 2.0);
  EXPECT_EQ(m.memory(2)[0], 0.4);
  EXPECT_EQ(m.last_update(2), 1.0);
}

TEST(UpdateMemory, TimeRegressionIsContractViolation) {
  Fixture f(small());
  MemoryState m(2, 4);
  m.write(0, std::vector<double>(4, 0.1), 5.0);
  MessageMap msgs;
  msgs[0] = RawMessage{0, 1, 4.0, 1.0, {}};
  EXPECT_THROW(f.module.update_memory(f.params, m, msgs), ContractViolation);
}

TEST(Staging, FirstBatchSeesZeroMemory) {
  Fixture f(small());
  const EventStore s({ev(0, 1, 1), ev(1, 2, 2)}, true, 3);
  MemoryState m(3, 4);
  Tape tape;
  ParamVars p(tape, f.params, false);
  const auto upd = f.module.update(p, m, m.staged());
  EXPECT_TRUE(upd.nodes.empty());
  MemoryView view(tape, m, &upd);
  const std::vector<NodeId> nodes{0, 1, 2};
  EXPECT_TRUE(all_zero(view.rows(nodes).value().data()));
}

TEST(Staging, RepeatedEdgeSeesNonzeroMemoryInSecondBatch) {
  Fixture f(small());
  const std::vector<Event> b1{ev(0, 1, 1)}, b2{ev(0, 1, 2)};
  MemoryState m(2, 4);
  const std::vector<NodeId> nodes{0, 1};
  Tensor first, second;
  for (int k = 0; k < 2; ++k) {
    Tape tape;
    ParamVars p(tape, f.params, false);
    const auto upd = f.module.update(p, m, m.staged());
    MemoryView view(tape, m, &upd);
    (k == 0 ? first : second) = view.rows(nodes).value();
    f.module.finish_batch(m, upd, k == 0 ? b1 : b2);
  }
  EXPECT_TRUE(all_zero(first.data()));
  EXPECT_FALSE(all_zero(second.data()));
  EXPECT_NE(first, second);
}

TEST(Staging, SingleBatchStagesWithoutChangingMemory) {
  Fixture f(small());
  const EventStore s({ev(0, 1, 1), ev(1, 2, 2)}, true, 3);
  MemoryState m = replay(f, s, 10);
  for (NodeId n = 0; n < 3; ++n) EXPECT_TRUE(all_zero(m.memory(n)));
  EXPECT_EQ(m.staged().size(), 3u);
  // Applying the staged messages directly equals the end-of-batch update.
  MemoryState direct(3, 4);
  f.module.update_memory(f.params, direct, f.module.compute_messages(s.events(), direct));
  f.module.update_memory(f.params, m, m.staged());
  for (NodeId n = 0; n < 3; ++n) {
    const auto a = m.memory(n), b = direct.memory(n);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(Staging, OutOfOrderBatchIsContractViolation) {
  Fixture f(small());
  MemoryState m(3, 4);
  const std::vector<Event> late{ev(0, 1, 5)}, early{ev(1, 2, 3)};
  f.module.stage_and_apply(f.params, m, late);
  EXPECT_THROW(f.module.stage_and_apply(f.params, m, early), ContractViolation);
}

TEST(Memory, ReplayIsBitwiseDeterministic) {
  Fixture f(small());
  const EventStore s = toy_graph(8, 60, 3, 0);
  EXPECT_EQ(replay(f, s, 7), replay(f, s, 7));
}

TEST(Memory, UntouchedNodeStaysZero) {
  Fixture f(small());
  const EventStore s = toy_graph(6, 50, 4, 0);
  EventStore wider(std::vector<Event>(s.events().begin(), s.events().end()), true, 9);
  const MemoryState m = replay(f, wider, 5);
  for (NodeId n = 6; n < 9; ++n) {
    EXPECT_TRUE(all_zero(m.memory(n)));
    EXPECT_EQ(m.last_update(n), 0.0);
  }
  EXPECT_FALSE(all_zero(m.memory(s[0].src)));
}

TEST(Memory, ResetIsIdempotent) {
  Fixture f(small());
  MemoryState m = replay(f, toy_graph(6, 40, 5, 0), 4);
  m.reset();
  const MemoryState once = m;
  m.reset();
  EXPECT_EQ(m, once);
  EXPECT_EQ(m, MemoryState(6, 4));
  for (NodeId n = 0; n < 6; ++n) EXPECT_TRUE(all_zero(m.memory(n)));
}

TEST(Memory, ResetThenReplayReproducesFirstPass) {
  Fixture f(small());
  const EventStore s = toy_graph(6, 40, 6, 0);
  MemoryState m(6, 4);
  for (auto b : iterate_batches(s, 4)) f.module.stage_and_apply(f.params, m, b);
  const MemoryState first = m;
  m.reset();
  for (auto b : iterate_batches(s, 4)) f.module.stage_and_apply(f.params, m, b);
  EXPECT_EQ(m, first);
}

TEST(Memory, CheckpointRoundTripIncludesStaging) {
  MemoryConfig c = small();
  c.edge_dim = 2;
  Fixture f(c);
  const MemoryState m = replay(f, toy_graph(6, 30, 7, 2), 4);
  ASSERT_FALSE(m.staged().empty());
  Checkpoint ck;
  m.save(ck, "memory/");
  EXPECT_EQ(MemoryState::load(ck, "memory/"), m);
}

TEST(MemoryView, UnknownNodePolicy) {
  MemoryState m(2, 3);
  Tape tape;
  const std::vector<NodeId> nodes{0, 5};
  EXPECT_THROW(MemoryView(tape, m, nullptr).rows(nodes), DataError);
  const Var r = MemoryView(tape, m, nullptr, true).rows(nodes);
  EXPECT_TRUE(all_zero(r.value().data()));
}

TEST(Memory, GruUpdatePassesGradCheck) {
  const auto r = run_gradcheck("memory_store");
  EXPECT_TRUE(r.passed) << r.max_rel_error;
  EXPECT_LT(r.max_rel_error, 1e-4);
  bool saw_msg = false, saw_mem = false;
  for (const auto& pc : r.params) {
    saw_msg |= pc.name.rfind("msg/", 0) == 0;
    saw_mem |= pc.name.rfind("mem/", 0) == 0;
  }
  EXPECT_TRUE(saw_msg && saw_mem);
}
