// SPDX-License-Identifier: Apache-2.0
#include "pathnav/tasks/prompts.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace pathnav::tasks
{

namespace
{

std::string or_list(const std::vector<std::string>& items, bool quoted)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i)
    {
        if (i > 0)
            out += i + 1 == items.size() ? " or " : ", ";
        out += quoted ? fmt::format("'{}'", items[i]) : items[i];
    }
    return out;
}

std::vector<std::string> label_names(const std::vector<LabelDef>& labels)
{
    std::vector<std::string> out;
    for (const auto& l: labels)
        out.push_back(l.label);
    return out;
}

constexpr std::string_view kSubtypeTemplate =
    "You are provided {n} histological slides from a tissue biopsy. Each slide highlights a specific region of "
    "interest (ROI) containing key cellular structures. Your task is to classify the slides into one of the "
    "following subtypes: {names}.\n\n"
    "Use the detailed histological features below to guide your decision-making:\n\n"
    "{descriptions}\n\n"
    "Analyze all {n} slides provided and determine the most likely subtype based on the consistency of features "
    "observed across the regions. Considering these characteristics, **provide only the classification word** "
    "– {example} – without any additional text or explanation. You have to make a decision even though "
    "you are unsure.";

constexpr std::string_view kVqaTemplate =
    "You are a medical AI assistant trained to analyze pathology slides and answer multiple-choice questions "
    "related to cancer diagnosis. You are provided {n} histological slides from a tissue biopsy. Each slide "
    "highlights a specific region of interest (ROI) containing key cellular structures. For each question, select "
    "the most appropriate answer from the given choices. If you are uncertain, select the answer that is the "
    "closest match based on available information. Your response must strictly follow the order of the "
    "questions, and answers should be separated by a comma. Do not provide any explanations or additional "
    "information.\n\n"
    "{questions}\n\n"
    "Analyze all {n} slides provided and determine the most likely answer for each question.\n\n"
    "Answers:";

constexpr std::string_view kReportTemplate =
    "Generate a comprehensive pathology report for a patient diagnosed with {cancer_type}. This report should be "
    "professional, medically accurate, and well-structured. You are provided with some real-world pathology "
    "reports as reference. These examples are meant to offer insights into the type of information that might be "
    "included in such reports, but you do NOT need to follow their format or structure exactly. Instead, generate "
    "a report using your own medical knowledge, ensuring it is detailed, logical, and clinically relevant. Here are "
    "some pathology report examples for reference: {examples}. Now, based on your medical expertise, generate a "
    "detailed pathology report for a patient with the same cancer type. Make sure your report is structured "
    "professionally, with accurate clinical descriptions and findings.";

constexpr std::string_view kJudgeTemplate =
    "You are an expert in scientific pathology report evaluation. Your task is to compare two pathology reports and "
    "assign a similarity score on a scale from 0 to 10. A score of 10 indicates that the reports describe nearly "
    "identical medical findings, whereas a score of 0 means they discuss completely different content. Ignore "
    "irrelevant details such as patient name, sample ID, date, physician name, and other administrative "
    "information. Although the reports may differ in formatting, focus only on comparing their medical content, "
    "including diagnoses, observations, and clinical details. Provide only a single numerical score from 0 to 10, "
    "without explanation.";

constexpr std::string_view kChecklistCompareTemplate =
    "You are an expert pathologist simulating the process of filling out a TCGA enrollment form based on "
    "pathology reports. You will compare the reference pathology report and the candidate pathology report to "
    "evaluate their consistency. Each question corresponds to a section in the form, and the choices are the "
    "available options. Your task is to determine whether the candidate report provides the same answer as the "
    "reference report for each question.\n\n"
    "Reference Report:\n\n\"\"{reference}\"\"\n\n"
    "Candidate Report:\n\n\"\"{candidate}\"\"\n\n"
    "Checklist Questions:\n\n{questions}\n\n"
    "Instructions:\n\n"
    "- For each question, determine if the candidate report provides the same answer as the reference report.\n"
    "- If the answers are identical, return 0. If they are different, return 1.\n"
    "- Ignore minor wording differences, focus on the meaning.\n"
    "- If the candidate report does not provide an answer, assume it differs from the reference and mark it as 1.\n"
    "- Only return a JSON array of 0s and 1s, strictly in order, without any additional text.\n"
    "- Do NOT include any extra text. The output must ONLY be a valid JSON array.\n\n"
    "Output Format (Example):\n\n[0, 0, 1, 1, 0, ...]\n\n"
    "Now, generate your response.";

constexpr std::string_view kRiskTemplate =
    "You are an expert pathologist specializing in histological image analysis. Your task is to predict the risk "
    "level (0, 1, or 2) for a patient based on several provided regions of interest (ROI) from a histopathology "
    "slide.\n\n"
    "The risk levels are defined as follows:\n\n"
    "- 0 = Low risk (long survival time, e.g., > 36 months)\n"
    "- 1 = Medium risk (moderate survival time, e.g., 12-36 months)\n"
    "- 2 = High risk (short survival time, e.g., < 12 months)\n\n"
    "Instruction:\n\n"
    "1. The first 3 images are example ROI images with known risk levels.\n"
    "2. The remaining images are new ROI images from a patient with {cancer_type} cancer. Your task is to analyze "
    "all remaining ROIs and assign a risk level (0, 1, or 2) for this slide.\n"
    "3. Return only a SINGLE predicted risk level for all remaining images (except the first three images). For "
    "example: 1\n"
    "4. ONLY return a SINGLE number from 0, 1, and 2, even though you are not sure. Do NOT include ANY other "
    "information in the response!\n\n"
    "Few-shot Example Risk Levels:\n\n"
    "{examples}";

} // namespace

std::string navigation_query(const TaskSpec& spec)
{
    switch (spec.kind)
    {
    case TaskKind::Subtyping:
        return fmt::format("What is the cancer subtype of this slide? Is it {}?", or_list(label_names(spec.labels), false));
    case TaskKind::Report:
    case TaskKind::Checklist:
        return fmt::format("Generate a concise pathology report for this {} cancer slide.\n"
                           "Select an ROI that best captures diagnostic features such as tumor architecture, "
                           "cellular morphology, and relevant markers.",
                           spec.cancer_type);
    case TaskKind::Survival:
        return fmt::format("What is the survival risk level for this {} cancer image?\n"
                           "Select from the following options: Low (>36 months), Intermediate (12-36 months), or "
                           "High (<12 months).",
                           spec.cancer_type);
    case TaskKind::Vqa:
        return fmt::format("Find the region that best answers these questions:\n\n{}", questions_block(spec.questions));
    }
    return {};
}

std::string subtype_prompt(const std::vector<LabelDef>& labels, int num_images)
{
    std::string descriptions;
    for (const auto& l: labels)
    {
        if (!descriptions.empty())
            descriptions += "\n\n";
        descriptions += fmt::format("{}: {}", l.label, l.description);
    }
    std::vector<std::string> names = label_names(labels);
    return fmt::format(fmt::runtime(kSubtypeTemplate), fmt::arg("n", num_images),
                       fmt::arg("names", fmt::format("{}", fmt::join(names, ", "))),
                       fmt::arg("descriptions", descriptions),
                       fmt::arg("example", "e.g., " + or_list(names, true)));
}

std::string questions_block(const std::vector<Question>& questions)
{
    std::string out;
    for (std::size_t i = 0; i < questions.size(); ++i)
    {
        if (i > 0)
            out += "\n\n";
        out += fmt::format("Question {}: {}\nChoices: {}", i + 1, questions[i].text,
                           fmt::join(questions[i].options, " | "));
    }
    return out;
}

std::string vqa_prompt(const std::vector<Question>& questions, int num_images)
{
    return fmt::format(fmt::runtime(kVqaTemplate), fmt::arg("n", num_images),
                       fmt::arg("questions", questions_block(questions)));
}

std::string report_prompt(const std::string& cancer_type, const std::vector<std::string>& exemplars)
{
    std::string examples;
    for (std::size_t i = 0; i < exemplars.size(); ++i)
        examples += fmt::format("\n\n{}{}:\n\"\"\"\n{}\n\"\"\"", kExemplarBlockPrefix, i + 1, exemplars[i]);
    examples += "\n\n";
    return fmt::format(fmt::runtime(kReportTemplate), fmt::arg("cancer_type", cancer_type),
                       fmt::arg("examples", examples));
}

std::string risk_prompt(const std::string& cancer_type, const std::vector<RiskLevel>& exemplar_levels)
{
    std::string examples;
    for (std::size_t i = 0; i < exemplar_levels.size(); ++i)
    {
        if (i > 0)
            examples += "\n\n";
        examples += fmt::format("Example {}: Risk Level = {}", i + 1, static_cast<int>(exemplar_levels[i]));
    }
    return fmt::format(fmt::runtime(kRiskTemplate), fmt::arg("cancer_type", cancer_type),
                       fmt::arg("examples", examples));
}

std::string judge_system_prompt()
{
    return std::string(kJudgeTemplate);
}

std::string judge_user_prompt(const std::string& generated, const std::string& reference)
{
    return fmt::format("Report 1:\n\"\"\"\n{}\n\"\"\"\n\nReport 2:\n\"\"\"\n{}\n\"\"\"\n\nScore:", reference, generated);
}

std::string checklist_compare_prompt(const std::string& reference, const std::string& candidate,
                                     const std::vector<Question>& items)
{
    std::string qs;
    for (std::size_t i = 0; i < items.size(); ++i)
    {
        if (i > 0)
            qs += '\n';
        qs += fmt::format("{}. {} (choices: {})", i + 1, items[i].text, fmt::join(items[i].options, " / "));
    }
    return fmt::format(fmt::runtime(kChecklistCompareTemplate), fmt::arg("reference", reference),
                       fmt::arg("candidate", candidate), fmt::arg("questions", qs));
}

std::string checklist_extract_prompt(const std::string& report, const Question& item)
{
    return fmt::format("Read the pathology report below and answer one question from a structured form.\n\n"
                       "Report:\n\"\"\"\n{}\n\"\"\"\n\n"
                       "Question: {}\nChoices: {}\n\n"
                       "Reply with exactly one choice, copied verbatim from the list, and nothing else. If the "
                       "report does not address the question, pick the closest choice.",
                       report, item.text, fmt::join(item.options, " | "));
}

} // namespace pathnav::tasks
