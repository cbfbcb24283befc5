/** Typed client for the report service. The wizard holds no model logic:
 * hypothesis tracking, fallback mode and Option # disambiguation are all
 * server-computed and only displayed here. */

export interface AppRef {
  app_id: string;
  version: string;
}

export interface SuggestionEntry {
  descriptor_id: string | null;
  object_index: number | null;
  state_id: string | null;
  display_type: string | null;
  display_text: string;
  display_location: string | null;
  thumbnail: string | null;
  disambiguator: string | null;
  is_manual_option: boolean;
}

export interface SuggestionSet {
  provenance: 'STATE_SCOPED' | 'ALL_SCREENS_FALLBACK';
  entries: SuggestionEntry[];
}

export interface StepTargetBody {
  descriptor_id: string;
  object_index: number;
  state_id: string;
}

export interface ManualBody {
  component_type: string;
  text: string;
  relative_location: string;
}

export interface AddStepBody {
  action: string;
  target?: StepTargetBody;
  manual?: ManualBody;
  entered_text?: string;
  direction?: string;
  note?: string;
  confirmed_full_screenshot?: string;
}

export interface StepDoc {
  step_index: number;
  action: { kind: string; text?: string; direction?: string };
  target: Record<string, unknown>;
  entered_text: string;
  note: string;
  confirmed_full_screenshot: string | null;
}

export interface AddStepResponse {
  session_id: string;
  steps: StepDoc[];
  hypothesis: { known: string[] | null };
}

export interface StepViewDoc {
  step_index: number;
  action: { kind: string; text?: string; direction?: string };
  component_type: string;
  component_text: string;
  location: string;
  source_unit: string;
  component_screenshot: string;
}

export interface ReportDoc {
  report_id: number;
  title: string;
  device_name: string;
  description: string;
  derived: StepViewDoc[];
  full_screenshots: string[];
}

export interface CreateSessionBody {
  app_id: string;
  version: string;
  reporter_name: string;
  device_name: string;
  orientation: string;
  title: string;
  description: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly field?: string,
  ) {
    super(message);
  }
}

export class Client {
  constructor(readonly base: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, 'network', `network failure: ${String(err)}`);
    }
    if (!resp.ok) {
      let code = 'error';
      let message = `request failed with status ${resp.status}`;
      let field: string | undefined;
      try {
        const body = await resp.json();
        code = body.error ?? code;
        message = body.message ?? message;
        field = body.field;
      } catch {
        /* non-JSON error body; keep the status message */
      }
      throw new ApiError(resp.status, code, message, field);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  listApps(): Promise<AppRef[]> {
    return this.request<AppRef[]>('/apps');
  }

  async createSession(body: CreateSessionBody): Promise<string> {
    const doc = await this.post<{ session_id: string }>('/sessions', body);
    return doc.session_id;
  }

  getSuggestions(sessionId: string, action: string): Promise<SuggestionSet> {
    return this.request<SuggestionSet>(
      `/sessions/${encodeURIComponent(sessionId)}/suggestions?action=${encodeURIComponent(action)}`,
    );
  }

  async getConfirmations(sessionId: string, descriptorId: string, objectIndex: number): Promise<string[]> {
    const doc = await this.post<{ screenshots: string[] }>(
      `/sessions/${encodeURIComponent(sessionId)}/confirmations`,
      { descriptor_id: descriptorId, object_index: objectIndex },
    );
    return doc.screenshots;
  }

  addStep(sessionId: string, body: AddStepBody): Promise<AddStepResponse> {
    return this.post<AddStepResponse>(`/sessions/${encodeURIComponent(sessionId)}/steps`, body);
  }

  async finalize(sessionId: string): Promise<number> {
    const doc = await this.post<{ report_id: number }>(
      `/sessions/${encodeURIComponent(sessionId)}/finalize`,
      {},
    );
    return doc.report_id;
  }

  getReport(reportId: number): Promise<ReportDoc> {
    return this.request<ReportDoc>(`/reports/${reportId}`);
  }

  shotUrl(digest: string): string {
    return `${this.base}/shots/${digest}.png`;
  }
}

export const ACTIONS = ['CLICK', 'LONG_CLICK', 'TYPE', 'SWIPE'] as const;
export const SWIPE_DIRECTIONS = ['UP', 'DOWN', 'LEFT', 'RIGHT'] as const;
export const COMPONENT_TYPES = [
  'BUTTON',
  'SPINNER',
  'CHECKBOX',
  'TEXT_FIELD',
  'LIST_ITEM',
  'MENU_ITEM',
  'IMAGE',
  'GENERIC',
] as const;
export const LOCATIONS = [
  'TOP_LEFT',
  'TOP_CENTER',
  'TOP_RIGHT',
  'MIDDLE_LEFT',
  'CENTER',
  'MIDDLE_RIGHT',
  'BOTTOM_LEFT',
  'BOTTOM_CENTER',
  'BOTTOM_RIGHT',
] as const;
