#include <regex>
#include <sstream>

#include "tom/planner.hpp"

namespace tom {

std::string format_plan_text(const Plan& plan) {
    std::ostringstream os;
    for (const auto& f : plan.steps) {
        os << to_string(f.kind) << '(' << to_string(f.arm) << ", " << f.tool;
        switch (f.kind) {
            case FnKind::Grasp:
            case FnKind::Release: break;
            case FnKind::Approach:
            case FnKind::Stepping: os << ", " << f.object; break;
            case FnKind::Interact: os << ", " << f.object << ", " << to_string(f.goal); break;
            case FnKind::Pass: os << ", " << f.object << ", " << to_string(f.arm2); break;
        }
        os << ")\n";
    }
    return os.str();
}

namespace {

std::vector<std::string> split_args(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t\r\n\"'");
        const auto e = item.find_last_not_of(" \t\r\n\"'");
        out.push_back(b == std::string::npos ? std::string{} : item.substr(b, e - b + 1));
    }
    return out;
}

[[noreturn]] void malformed(const std::string& why, const std::string& raw) {
    throw Error(ErrorCode::MalformedPlanText, why + "; raw text:\n" + raw);
}

}  // namespace

Plan parse_plan_text(const std::string& text) {
    static const std::regex call(R"((grasp|approach|interact|stepping|pass|release)\s*\(([^)]*)\))",
                                 std::regex::icase);
    Plan plan;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), call); it != std::sregex_iterator(); ++it) {
        std::string name = (*it)[1].str();
        for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        const FnKind kind = *parse_fn_kind(name);
        const auto args = split_args((*it)[2].str());
        const std::size_t arity = kind == FnKind::Grasp || kind == FnKind::Release       ? 2
                                  : kind == FnKind::Approach || kind == FnKind::Stepping ? 3
                                                                                         : 4;
        if (args.size() != arity) malformed("'" + it->str() + "' expects " + std::to_string(arity) + " arguments", text);
        const auto arm = parse_arm(args[0]);
        if (!arm) malformed("unknown arm '" + args[0] + "' in '" + it->str() + "'", text);

        MotionFunction f;
        f.kind = kind;
        f.arm = *arm;
        f.tool = args[1];
        if (arity >= 3) f.object = args[2];
        if (kind == FnKind::Interact) {
            if (args[3] == "target") {
                f.goal = GoalKind::Target;
            } else if (args[3] == "handover" || args[3] == "handover_zone") {
                f.goal = GoalKind::Handover;
            } else {
                malformed("unknown goal '" + args[3] + "'", text);
            }
        }
        if (kind == FnKind::Pass) {
            const auto to = parse_arm(args[3]);
            if (!to) malformed("unknown receiving arm '" + args[3] + "'", text);
            f.arm2 = *to;
        }
        plan.steps.push_back(std::move(f));
    }
    if (plan.steps.empty()) malformed("no motion function calls found", text);
    return plan;
}

}  // namespace tom
