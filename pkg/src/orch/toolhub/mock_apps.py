"""In-memory mock toolsets for a notes app and a project board.

Together with the builtin filesystem toolset (12 tools) these bring the
registry to 30 tools across 3 toolsets, which is the scale the context
containment tests exercise. Handlers keep state in plain dicts.
"""

from __future__ import annotations

import json

from .builtin import BuiltinToolset, _obj


def notion_toolset(toolset_id: str = "notion") -> BuiltinToolset:
    """Knowledge-base mock: pages, databases, blocks. 9 tools."""
    ts = BuiltinToolset(toolset_id=toolset_id)
    pages: dict = {}
    databases: dict = {"tasks-db": []}
    next_id = [1]

    def _new_id(prefix):
        next_id[0] += 1
        return f"{prefix}-{next_id[0]}"

    def create_page(args, policy):
        page_id = _new_id("page")
        pages[page_id] = {"title": args["title"], "content": args.get("content", ""), "blocks": []}
        return json.dumps({"page_id": page_id, "title": args["title"]})

    def get_page(args, policy):
        page = pages[args["page_id"]]
        return json.dumps({"page_id": args["page_id"], **page})

    def update_page(args, policy):
        pages[args["page_id"]]["content"] = args["content"]
        return f"updated {args['page_id']}"

    def delete_page(args, policy):
        pages.pop(args["page_id"])
        return f"deleted {args['page_id']}"

    def search_pages(args, policy):
        hits = [pid for pid, p in pages.items() if args["query"].lower() in p["title"].lower()]
        return json.dumps(hits)

    def list_databases(args, policy):
        return json.dumps(sorted(databases))

    def query_database(args, policy):
        return json.dumps(databases[args["database_id"]])

    def add_database_row(args, policy):
        databases.setdefault(args["database_id"], []).append(args["row"])
        return f"added row to {args['database_id']}"

    def append_block(args, policy):
        pages[args["page_id"]]["blocks"].append(args["text"])
        return f"appended block to {args['page_id']}"

    ts.add("create_page", "Create a new page with a title and optional body content.",
           _obj({"title": {"type": "string"}, "content": {"type": "string"}}, ["title"]), create_page)
    ts.add("get_page", "Fetch a page's title, content and blocks by page id.",
           _obj({"page_id": {"type": "string"}}, ["page_id"]), get_page)
    ts.add("update_page", "Replace the body content of an existing page.",
           _obj({"page_id": {"type": "string"}, "content": {"type": "string"}}, ["page_id", "content"]), update_page)
    ts.add("delete_page", "Delete a page permanently.",
           _obj({"page_id": {"type": "string"}}, ["page_id"]), delete_page)
    ts.add("search_pages", "Search page titles for a query string and return matching page ids.",
           _obj({"query": {"type": "string"}}, ["query"]), search_pages)
    ts.add("list_databases", "List the ids of all databases in the workspace.",
           _obj({}, []), list_databases)
    ts.add("query_database", "Return all rows of a database by database id.",
           _obj({"database_id": {"type": "string"}}, ["database_id"]), query_database)
    ts.add("add_database_row", "Append a row object to a database.",
           _obj({"database_id": {"type": "string"}, "row": {"type": "object"}}, ["database_id", "row"]), add_database_row)
    ts.add("append_block", "Append a text block to the end of a page.",
           _obj({"page_id": {"type": "string"}, "text": {"type": "string"}}, ["page_id", "text"]), append_block)
    return ts


def monday_toolset(toolset_id: str = "monday") -> BuiltinToolset:
    """Project-board mock: boards, tasks, assignments, comments. 9 tools."""
    ts = BuiltinToolset(toolset_id=toolset_id)
    boards: dict = {"main": {}}
    next_id = [1]

    def _board(board_id):
        return boards[board_id]

    def create_task(args, policy):
        next_id[0] += 1
        task_id = f"task-{next_id[0]}"
        _board(args["board_id"])[task_id] = {
            "name": args["name"], "status": "todo", "assignee": None, "comments": [],
        }
        return json.dumps({"task_id": task_id})

    def get_task(args, policy):
        return json.dumps(_board(args["board_id"])[args["task_id"]])

    def update_task_status(args, policy):
        _board(args["board_id"])[args["task_id"]]["status"] = args["status"]
        return f"status of {args['task_id']} set to {args['status']}"

    def delete_task(args, policy):
        _board(args["board_id"]).pop(args["task_id"])
        return f"deleted {args['task_id']}"

    def list_boards(args, policy):
        return json.dumps(sorted(boards))

    def list_tasks(args, policy):
        return json.dumps(sorted(_board(args["board_id"])))

    def assign_task(args, policy):
        _board(args["board_id"])[args["task_id"]]["assignee"] = args["assignee"]
        return f"assigned {args['task_id']} to {args['assignee']}"

    def add_comment(args, policy):
        _board(args["board_id"])[args["task_id"]]["comments"].append(args["text"])
        return f"comment added to {args['task_id']}"

    def search_tasks(args, policy):
        hits = [tid for tid, t in _board(args["board_id"]).items()
                if args["query"].lower() in t["name"].lower()]
        return json.dumps(hits)

    board_arg = {"board_id": {"type": "string"}}
    task_args = {"board_id": {"type": "string"}, "task_id": {"type": "string"}}
    ts.add("create_task", "Create a task on a board with a name; it starts in status todo.",
           _obj({**board_arg, "name": {"type": "string"}}, ["board_id", "name"]), create_task)
    ts.add("get_task", "Fetch a task's name, status, assignee and comments.",
           _obj(task_args, ["board_id", "task_id"]), get_task)
    ts.add("update_task_status", "Set a task's workflow status (e.g. todo, doing, done).",
           _obj({**task_args, "status": {"type": "string"}}, ["board_id", "task_id", "status"]), update_task_status)
    ts.add("delete_task", "Remove a task from a board.",
           _obj(task_args, ["board_id", "task_id"]), delete_task)
    ts.add("list_boards", "List the ids of all boards.", _obj({}, []), list_boards)
    ts.add("list_tasks", "List the task ids on a board.",
           _obj(board_arg, ["board_id"]), list_tasks)
    ts.add("assign_task", "Assign a task to a team member by name.",
           _obj({**task_args, "assignee": {"type": "string"}}, ["board_id", "task_id", "assignee"]), assign_task)
    ts.add("add_comment", "Add a comment to a task.",
           _obj({**task_args, "text": {"type": "string"}}, ["board_id", "task_id", "text"]), add_comment)
    ts.add("search_tasks", "Search task names on a board for a query string.",
           _obj({**board_arg, "query": {"type": "string"}}, ["board_id", "query"]), search_tasks)
    return ts


BUILTIN_FACTORIES = {}


def _register_factories():
    from .builtin import filesystem_toolset

    BUILTIN_FACTORIES.update(
        filesystem=filesystem_toolset,
        notion=notion_toolset,
        monday=monday_toolset,
    )


_register_factories()
