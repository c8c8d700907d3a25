/**
 * Interactive configurator: wires the API client, session state, and view.
 *
 * Flow per user action: issue the API call, mirror the response into local
 * state, then poll the recommendation endpoints (value badges for unset
 * features plus the suggested next question) and re-render. When the
 * server flags the session inconsistent, fetch conflicts and utility-ranked
 * repairs and open the repair dialog.
 */

import { ApiClient, FeatureEntry, NetworkError, RepairOption } from './api.js';
import { ActionQueue, applyForced, initialState, UiSessionState } from './state.js';
import { Handlers, render } from './view.js';

export interface AppOptions {
    modelId: string;
    userId: string;
    profile: string; // interest profile used to rank repairs
    neighborCount?: number;
}

export class ConfiguratorApp implements Handlers {
    readonly state: UiSessionState = initialState();
    private features: FeatureEntry[] = [];
    private readonly queue = new ActionQueue();
    private lastAction: (() => Promise<void>) | null = null;

    constructor(
        private readonly api: ApiClient,
        private readonly root: HTMLElement,
        private readonly options: AppOptions,
    ) {}

    async start(): Promise<void> {
        await this.guarded(async () => {
            const model = await this.api.getModel(this.options.modelId);
            this.features = model.features;
            this.state.sessionId = await this.api.createSession(this.options.modelId, this.options.userId);
            const session = await this.api.getSession(this.state.sessionId);
            this.state.status = session.status;
            this.state.values = { ...session.values };
            applyForced(this.state, session.forced);
            await this.refreshRecommendations();
        });
        this.render();
    }

    onToggle(feature: string, value: 0 | 1): void {
        void this.queue.run(() => this.performAssign(feature, value));
    }

    onApplyRepair(option: RepairOption): void {
        void this.queue.run(async () => {
            await this.guarded(async () => {
                // a repair is applied as its assignments, in listed order
                for (const [feature, value] of Object.entries(option.changes)) {
                    await this.api.assign(this.sessionId(), feature, value as 0 | 1);
                    this.state.values[feature] = value as 0 | 1;
                }
                const session = await this.api.getSession(this.sessionId());
                this.state.status = session.status;
                this.state.values = { ...session.values };
                applyForced(this.state, session.forced);
                if (session.status === 'open') {
                    this.state.repairs = null;
                    this.state.conflicts = [];
                }
                await this.refreshRecommendations();
            });
            this.render();
        });
    }

    onDismissRepairs(): void {
        this.state.repairs = null;
        this.render();
    }

    onComplete(): void {
        void this.queue.run(async () => {
            await this.guarded(async () => {
                this.state.status = await this.api.complete(this.sessionId());
            });
            this.render();
        });
    }

    onRetry(): void {
        const action = this.lastAction;
        this.state.error = null;
        if (action === null) {
            this.render();
            return;
        }
        void this.queue.run(async () => {
            await this.guarded(action);
            this.render();
        });
    }

    private async performAssign(feature: string, value: 0 | 1): Promise<void> {
        await this.guarded(async () => {
            const result = await this.api.assign(this.sessionId(), feature, value);
            this.state.values[feature] = value;
            this.state.status = result.status;
            applyForced(this.state, result.forced);
            if (result.status === 'inconsistent') {
                await this.openRepairDialog();
            } else {
                this.state.repairs = null;
                this.state.conflicts = [];
                await this.refreshRecommendations();
            }
        });
        this.render();
    }

    private async openRepairDialog(): Promise<void> {
        this.state.badges = {};
        this.state.nextFeature = null;
        this.state.conflicts = await this.api.conflicts(this.sessionId());
        this.state.repairs = await this.api.repairs(this.sessionId(), this.options.profile);
    }

    /** Poll value badges for every undecided feature plus the next question. */
    private async refreshRecommendations(): Promise<void> {
        this.state.badges = {};
        this.state.nextFeature = null;
        if (this.state.status !== 'open') {
            return;
        }
        const undecided = this.features
            .map((feature) => feature.id)
            .filter((id) => !(id in this.state.values) && !(id in this.state.forced));
        const recommendations = await Promise.all(
            undecided.map((id) =>
                this.api.valueRecommendation(this.sessionId(), id, this.options.neighborCount ?? 2)),
        );
        for (const recommendation of recommendations) {
            if (recommendation !== null) {
                this.state.badges[recommendation.feature] = recommendation;
            }
        }
        this.state.nextFeature = await this.api.nextFeature(this.sessionId());
    }

    /** Run an action, turning network failures into the retryable banner. */
    private async guarded(action: () => Promise<void>): Promise<void> {
        this.lastAction = action;
        try {
            await action();
            this.state.error = null;
        } catch (error) {
            if (error instanceof NetworkError) {
                this.state.error = error.message;
                this.render();
                return;
            }
            throw error;
        }
    }

    private sessionId(): string {
        if (this.state.sessionId === null) {
            throw new Error('session not started');
        }
        return this.state.sessionId;
    }

    render(): void {
        render(this.root, this.features, this.state, this);
    }
}
