#include "fixture.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace comviewer::fixture {

namespace {

struct Theme {
  const char* name;
  std::vector<const char*> titles;
  std::vector<const char*> sentences;
};

const std::array<Theme, 4>& themes() {
  static const std::array<Theme, 4> t{{
      {"exam",
       {"Exam anxiety is ruining my semester", "Panic before every exam", "Finals week and my chest feels tight",
        "Cannot focus on studying for the exam", "Blanked out during my math exam"},
       {"My exam is on Monday and I have not studied enough.", "Every time I open my notes my heart starts racing.",
        "I failed the last exam and my grades keep slipping.", "The professor said the final exam counts for half the grade.",
        "Studying in the library makes my hands shake.", "I keep rereading the same chapter before the exam.",
        "My parents expect top grades on every exam.", "Last semester I froze during the chemistry exam."}},
      {"sleep",
       {"Cannot sleep because of racing thoughts", "Insomnia every night before class", "Waking up at 3am with panic",
        "Sleep schedule is completely broken", "Nightmares and no rest"},
       {"I lie in bed for hours and cannot fall asleep.", "My mind races at night and sleep never comes.",
        "I wake up at 3am with my heart pounding.", "Without sleep I feel like a zombie during the day.",
        "Melatonin did not help my insomnia.", "I scroll my phone in bed until late at night.",
        "Caffeine in the afternoon keeps me awake at night.", "My sleep has been broken for weeks."}},
      {"work",
       {"Job interview tomorrow and I am shaking", "My boss makes my anxiety worse", "Deadlines at work are crushing me",
        "Presentation at the office next week", "Thinking about quitting my job"},
       {"My boss emails me late at night about deadlines.", "I have a presentation at the office next week.",
        "The job interview is tomorrow morning.", "My manager criticized my report in the meeting.",
        "Work deadlines keep piling up on my desk.", "I dread every Monday morning at the office.",
        "My coworkers seem calm while I panic about the project.", "The performance review is next month."}},
      {"social",
       {"Social anxiety at parties", "Cannot make phone calls", "Afraid of talking to new people",
        "Friends invited me out and I panicked", "Overthinking every conversation"},
       {"At parties I stand in the corner and avoid everyone.", "Making a phone call feels impossible for me.",
        "I replay every conversation with friends for days.", "Meeting new people makes me sweat and blush.",
        "My friends invited me to dinner and I cancelled again.", "I worry that people judge everything I say.",
        "Group chats make me nervous about replying.", "Small talk with neighbors terrifies me."}},
  }};
  return t;
}

const std::vector<const char*> kSeekEmotional{"I feel so overwhelmed and alone.", "I am scared and I cannot stop crying.",
                                              "I feel hopeless and exhausted.", "Nobody understands how miserable I am.",
                                              "Please help, I am falling apart."};
const std::vector<const char*> kSeekInformational{"Any advice on how to cope?", "How do I calm down before it starts?",
                                                  "What should I do, any tips?", "Is this normal, has anyone been through it?",
                                                  "What helps you, does anyone know a way?"};
const std::vector<const char*> kProvideEmotional{"I am sorry you are going through this, you are not alone.",
                                                 "Sending hugs, I am proud of you for reaching out.",
                                                 "You got this, it will get better.", "It is okay to feel this way.",
                                                 "I understand, I have been there too."};
const std::vector<const char*> kProvideInformational{
    "Try deep breathing for five minutes and drink some water.", "Take a short walk and try a regular sleep schedule.",
    "You could try talking to a therapist or counselor.", "Try writing your worries down before bed.",
    "Practice progressive muscle relaxation and avoid caffeine."};
const std::vector<const char*> kNeutral{"Thanks for sharing.", "Same here honestly.", "This happens to me as well.",
                                        "Good luck with everything.", "Reading this at lunch."};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  bool chance(unsigned percent) { return below(100) < percent; }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

 private:
  std::mt19937_64 engine_;
};

std::string id_of(char prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, n);
  return buf;
}

}  // namespace

std::string desk_dump(const DeskOptions& options) {
  Rng rng(options.seed);
  std::string out;
  auto emit = [&](const nlohmann::json& j) {
    out += j.dump();
    out += '\n';
  };
  const std::int64_t t0 = 1672531200;  // 2023-01-01
  std::size_t comment_no = 0;
  const std::size_t tombstoned = 6;
  for (std::size_t p = 1; p <= options.posts + tombstoned; ++p) {
    const std::string pid = id_of('p', p, 4);
    const Theme& theme = themes()[(p - 1) % themes().size()];
    const Theme& other = themes()[rng.below(themes().size())];
    std::string body;
    const std::size_t n_sent = 2 + rng.below(3);
    for (std::size_t s = 0; s < n_sent; ++s) body += std::string(rng.pick(theme.sentences)) + " ";
    if (rng.chance(25)) body += std::string(rng.pick(other.sentences)) + " ";
    const unsigned es = static_cast<unsigned>(rng.below(3));  // 0..2 marker sentences
    const unsigned is = static_cast<unsigned>(rng.below(3));
    for (unsigned i = 0; i < es; ++i) body += std::string(rng.pick(kSeekEmotional)) + " ";
    for (unsigned i = 0; i < is; ++i) body += std::string(rng.pick(kSeekInformational)) + " ";
    body.pop_back();
    const bool post_removed = p > options.posts;
    const std::int64_t created = t0 + static_cast<std::int64_t>(p) * 3600;
    emit({{"id", pid},
          {"title", rng.pick(theme.titles)},
          {"selftext", post_removed ? (p % 2 ? "[removed]" : "[deleted]") : body},
          {"created_utc", created}});

    const std::size_t n_comments = rng.below(7);
    std::vector<std::string> thread;
    for (std::size_t c = 0; c < n_comments; ++c) {
      const std::string cid = id_of('c', ++comment_no, 5);
      std::string parent = "t3_" + pid;
      if (!thread.empty() && rng.chance(35)) parent = "t1_" + thread[rng.below(thread.size())];
      std::string text;
      const unsigned pe = static_cast<unsigned>(rng.below(3));
      const unsigned pi = static_cast<unsigned>(rng.below(3));
      for (unsigned i = 0; i < pe; ++i) text += std::string(rng.pick(kProvideEmotional)) + " ";
      for (unsigned i = 0; i < pi; ++i) text += std::string(rng.pick(kProvideInformational)) + " ";
      if (text.empty() || rng.chance(30)) text += std::string(rng.pick(kNeutral)) + " ";
      text.pop_back();
      if (rng.chance(4)) text = rng.chance(50) ? "[deleted]" : "[removed]";
      emit({{"id", cid}, {"parent_id", parent}, {"body", text}, {"created_utc", created + 60 * (c + 1)}});
      thread.push_back(cid);
    }
  }
  // A reply whose parent id is itself a tombstone.
  emit({{"id", id_of('c', ++comment_no, 5)}, {"parent_id", "[deleted]"}, {"body", "orphaned reply"}, {"created_utc", t0}});
  return out;
}

void write_desk_dump(const std::filesystem::path& path, const DeskOptions& options) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << desk_dump(options);
}

}  // namespace comviewer::fixture
